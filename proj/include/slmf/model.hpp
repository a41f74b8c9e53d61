// Game data model for single-leader multi-follower games whose followers
// have linear constraint data and linear-plus-diagonal-quadratic objectives,
// coupled to the leader through cardinality constraints on the followers'
// joint decision.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace slmf {

using Vector = std::vector<double>;

enum class Sense { Minimize, Maximize };

// +1 for minimization, -1 for maximization: multiplying an objective stated in
// its original sense by this factor yields the internal minimization form.
inline double sense_sign(Sense s) { return s == Sense::Minimize ? 1.0 : -1.0; }

// Dense row-major matrix. Zero rows or zero columns are legal.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  bool operator==(const Matrix&) const = default;
};

// Follower i (in its declared sense):
//   objective  f_i = alpha_i(x, y_{-i})^T y_i + beta_i^T (y_i .* y_i)
//   alpha_i    = alpha0 + alpha_x x + alpha_y y_{-i}
//   constraint g_i = B x + C y_i + D y_{-i} - gamma <= 0
// y_{-i} is the concatenation of the other followers' blocks in index order.
struct FollowerData {
  int dim = 0;
  Sense sense = Sense::Minimize;
  Matrix B;        // m_i x p
  Matrix C;        // m_i x q_i
  Matrix D;        // m_i x (q - q_i)
  Vector gamma;    // m_i
  Vector alpha0;   // q_i
  Matrix alpha_x;  // q_i x p
  Matrix alpha_y;  // q_i x (q - q_i)
  Vector beta;     // q_i

  int num_constraints() const { return static_cast<int>(gamma.size()); }
  bool operator==(const FollowerData&) const = default;
};

// Sum_k weight_k * (direction_k^T (x, y))^2. Terms are always ADDED to the
// internal (minimization) form of the leader objective, whatever the sense.
struct QuadTerm {
  double weight = 0.0;
  Vector direction;  // length p + q
  bool operator==(const QuadTerm&) const = default;
};

// Internal value:  sense_sign * (cx^T x + cy^T y) + sum of quad terms.
// Reported value:  sense_sign * internal, i.e. cx^T x + cy^T y -/+ quad.
struct LeaderObjective {
  Sense sense = Sense::Minimize;
  Vector cx;
  Vector cy;
  std::vector<QuadTerm> quad;
  bool operator==(const LeaderObjective&) const = default;
};

// X = { x : A x <= b, lower <= x <= upper }, some coordinates binary.
struct LeaderFeasibleSet {
  Matrix A;
  Vector b;
  Vector lower;
  Vector upper;
  std::vector<bool> binary;
  bool operator==(const LeaderFeasibleSet&) const = default;
};

struct CoordRef {
  int follower = 0;
  int coord = 0;
  bool operator==(const CoordRef&) const = default;
};

// || y_{indices} ||_0 <= bound
struct CardinalityConstraint {
  std::vector<CoordRef> indices;
  int bound = 0;
  bool operator==(const CardinalityConstraint&) const = default;
};

enum class CardinalityMode {
  Upper,  // coupling constraint of the leader
  Mixed,  // leader interdicts coordinates, followers obey u_i .* y_i = 0
};

struct GameSpec {
  LeaderObjective objective;
  LeaderFeasibleSet leader;
  std::vector<FollowerData> followers;
  std::vector<CardinalityConstraint> cardinality;
  CardinalityMode mode = CardinalityMode::Upper;

  int leader_dim() const { return static_cast<int>(leader.lower.size()); }
  int num_followers() const { return static_cast<int>(followers.size()); }
  int follower_total() const;
  // Offset of follower i's block inside the joint y vector.
  int offset(int i) const;
  int flat_index(CoordRef c) const { return offset(c.follower) + c.coord; }
  bool operator==(const GameSpec&) const = default;
};

struct Violation {
  std::string code;
  std::string message;
  bool operator==(const Violation&) const = default;
};

// Every invariant violation of the spec; empty when valid. Codes:
// DIMENSION_MISMATCH, NONFINITE_VALUE, BETA_SIGN, BOUND_ORDER, BINARY_BOUNDS,
// QUAD_WEIGHT_NEGATIVE, CARD_INDEX_OUT_OF_RANGE, CARD_NEGATIVE_BOUND,
// CARD_BOUND_EXCEEDS_SET, OVERLAPPING_CARD_SETS, NO_FOLLOWERS.
std::vector<Violation> validate(const GameSpec& spec);

// Throws std::invalid_argument listing the violations, if any.
void require_valid(const GameSpec& spec);

// y_{-i}: every follower block except i, in index order.
Vector others(const GameSpec& spec, int i, std::span<const double> y);
std::span<const double> block(const GameSpec& spec, int i, std::span<const double> y);

// alpha_i(x, y_{-i}) in the follower's declared sense.
Vector follower_alpha(const GameSpec& spec, int i, std::span<const double> x,
                      std::span<const double> y_minus_i);

// f_i(x, y_i, y_{-i}) in the follower's declared sense; y is the joint vector.
double follower_objective(const GameSpec& spec, int i, std::span<const double> x,
                          std::span<const double> y);

// grad_{y_i} f_i = alpha_i(x, y_{-i}) + 2 beta_i .* y_i, declared sense.
Vector follower_gradient(const GameSpec& spec, int i, std::span<const double> x,
                         std::span<const double> y);

// g_i(x, y) = B x + C y_i + D y_{-i} - gamma.
Vector follower_constraints(const GameSpec& spec, int i, std::span<const double> x,
                            std::span<const double> y);

// theta(x, y) in the leader's declared sense.
double leader_objective(const GameSpec& spec, std::span<const double> x,
                        std::span<const double> y);

}  // namespace slmf
