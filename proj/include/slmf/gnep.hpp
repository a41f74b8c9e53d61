// Equilibrium oracle for the followers' game at fixed leader decisions,
// independent of every reformulation.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slmf/kernel.hpp"
#include "slmf/model.hpp"

namespace slmf::gnep {

enum class ResponseStatus { Optimal, Infeasible, Unbounded, Failed };

const char* to_string(ResponseStatus s);

struct BestResponse {
  ResponseStatus status = ResponseStatus::Failed;
  Vector y;            // follower block, length q_i
  double value = 0.0;  // f_i at y in the follower's declared sense
};

// Global optimizer of follower i's convex problem over
// { z : B x + C z + D y_{-i} <= gamma, z_k = 0 where u_k = 1 }.
// `u` is the joint interdiction vector (length q) or empty for none.
BestResponse best_response(const GameSpec& spec, int i, std::span<const double> x,
                           std::span<const double> u, std::span<const double> y_minus_i);

enum class Method { Auto, Potential, BestResponse };

struct EquilibriumConfig {
  Method method = Method::Auto;
  double tol = 1e-8;          // verification tolerance on residuals
  double step_tol = 1e-10;    // sup-norm change that stops the iteration
  double damping = 0.5;
  int max_iterations = 10000;
  std::uint64_t seed = 1;     // random start
};

struct EquilibriumResult {
  bool found = false;
  Vector y;
  std::string method;  // "potential" or "best-response"
  int iterations = 0;
  double max_residual = 0.0;
};

// True when every follower's constraints ignore the others (D = 0) and the
// cross-interaction blocks are symmetric after sense normalization, so the
// followers jointly minimize a quadratic potential.
bool has_exact_potential(const GameSpec& spec, double tol = 1e-12);

// One equilibrium, or found = false (never throws for non-convergence).
EquilibriumResult find_equilibrium(const GameSpec& spec, std::span<const double> x,
                                   std::span<const double> u, const EquilibriumConfig& config = {});

struct FollowerResidual {
  int index = 0;
  double residual = 0.0;  // sense-normalized, >= 0 up to tolerance
  std::string code;       // "OK", "INFEASIBLE_RESPONSE", "BEST_RESPONSE_FAILED"
  std::string message;
};

struct EquilibriumReport {
  std::vector<FollowerResidual> followers;
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Throws std::invalid_argument on dimension mismatch.
EquilibriumReport verify_equilibrium(const GameSpec& spec, std::span<const double> x,
                                     std::span<const double> u, std::span<const double> y,
                                     double tol);

}  // namespace slmf::gnep
