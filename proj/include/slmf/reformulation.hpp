// Builders turning a GameSpec into single-level problems.
//
// Variable names: x[j], y[i][k], u[i][k], lambda[i][r], s[i][r] (slack of
// follower constraint r), eta[i][k], nu[i][k]. Stationarity rows are stated
// for the minimization form of each follower:
//   sign_i * (alpha_i(x, y_{-i}) + 2 beta_i .* y_i) + C_i^T lambda_i (+ ...) = 0.
#pragma once

#include <span>

#include "slmf/model.hpp"
#include "slmf/problem.hpp"

namespace slmf {

enum class ReformulationKind { CardRef, UpperMPCC, MixedMPCC, MixedFinal };

const char* to_string(ReformulationKind k);

struct ReformulationOptions {
  // Declare u binary. The default keeps u in [0, 1] for the upper
  // configuration; any feasible u can be rounded up to a binary one.
  bool binary_u = false;
};

// ||z||_0 <= K for z in R^n as: variables z[j] (free) and u[j] in [0, 1],
// row sum(u) >= n - K, pairs (u[j], z[j]). Throws std::invalid_argument
// unless 0 <= K <= n.
SingleLevelProblem card_to_complementarity(int n, int K, bool binary_u = false);

// Throw std::invalid_argument on a mode mismatch or an invalid spec.
SingleLevelProblem build_card_ref(const GameSpec& spec, const ReformulationOptions& opt = {});
SingleLevelProblem build_upper_mpcc(const GameSpec& spec, const ReformulationOptions& opt = {});
// Carries the bilinear nu .* u terms; only the enumeration oracle accepts it.
SingleLevelProblem build_mixed_mpcc(const GameSpec& spec);
SingleLevelProblem build_mixed_final(const GameSpec& spec);

SingleLevelProblem build(const GameSpec& spec, ReformulationKind kind,
                         const ReformulationOptions& opt = {});

// 0 where |u_k| <= zero_tol, else 1. Throws std::invalid_argument for
// entries outside [-zero_tol, 1 + zero_tol].
std::vector<int> normalize_u(std::span<const double> u, double zero_tol = 1e-9);

struct GamePoint {
  Vector x;
  Vector y;
  Vector u;  // empty when the problem has no interdiction variables
};

GamePoint extract_point(const SingleLevelProblem& problem, std::span<const double> values);

// Mixed-formulation multiplier maps: eta = nu .* u, and nu = eta where u = 1
// (nu is arbitrary where u = 0; zero is returned).
Vector eta_from_nu(std::span<const double> nu, std::span<const double> u);
Vector nu_from_eta(std::span<const double> eta, std::span<const double> u);

// Admissible interdiction patterns: 1^T u_{s_l} >= |s_l| - K_l for every
// cardinality constraint.
bool admissible_u(const GameSpec& spec, std::span<const double> u, double tol = 1e-9);

}  // namespace slmf
