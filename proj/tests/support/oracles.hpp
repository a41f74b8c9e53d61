// Test-side oracles. They use only the model, the LP kernel's public result
// and the equilibrium oracle, never the reformulations or the global solver.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "slmf/gnep.hpp"
#include "slmf/kernel.hpp"
#include "slmf/model.hpp"

namespace slmf::testing {

// ---- LP certificates -------------------------------------------------------

struct LpCertificate {
  double primal_violation = 0.0;  // bounds and rows, absolute
  double dual_violation = 0.0;    // sign of row duals and reduced costs
  double duality_gap = 0.0;       // |c^T x - (pi^T b + d^T x)| / (1 + |c^T x|)
  double slackness = 0.0;         // max |pi_i * slack_i| and |d_j| away from bounds
};

// Recomputes reduced costs from the duals; does not trust result.reduced_costs.
LpCertificate certify(const kernel::LpProblem& p, const kernel::LpResult& r);

// Bounded random LP around a known interior point; n, m >= 1.
kernel::LpProblem random_bounded_lp(std::mt19937_64& gen, int n, int m);

// ---- separable quadratic ---------------------------------------------------

struct DiagonalInstance {
  kernel::LpProblem lp;
  std::vector<kernel::ConvexTerm> terms;
  double oracle = 0.0;  // sum_j min over [l_j, u_j] of w_j z^2 + c_j z
};

DiagonalInstance random_diagonal(std::mt19937_64& gen, int n);

// ---- random games ----------------------------------------------------------

struct RandomGameOptions {
  int leader_dim = 2;         // binary leader coordinates
  int max_follower_dim = 3;   // two followers
  bool strictly_convex = true;  // beta > 0 (min form), D = 0: unique equilibrium
  bool leader_quad = true;
  CardinalityMode mode = CardinalityMode::Upper;
};

// Followers: y >= 0 rows plus one budget row a^T y_i <= b + B x (+ D y_{-i}
// in the linear class), so 0 is always feasible and m_i = q_i + 1.
GameSpec random_game(std::uint64_t seed, const RandomGameOptions& opt);

// ---- brute-force equilibrium oracle ----------------------------------------

struct OracleResult {
  bool feasible = false;
  double value = 0.0;  // leader objective, declared sense
  Vector x, y, u;
  int equilibria = 0;  // equilibrium computations performed
  bool all_found = true;
};

inline constexpr double kNonzeroTol = 1e-7;

// Requires every leader coordinate to be binary and the followers' game to
// have a unique equilibrium for each (x, u). Enumerates x in {0,1}^p and, in
// the mixed mode, every admissible u in {0,1}^q.
OracleResult equilibrium_oracle(const GameSpec& spec);

// ||z||_0 counted exactly.
int l0(const Vector& z);

bool close(double a, double b, double tol);  // |a-b| <= tol (1 + |b|)

}  // namespace slmf::testing
