// Relaxation engine: a dense bounded-variable simplex and a Kelley
// outer-approximation layer for convex quadratic objectives.
#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "slmf/problem.hpp"

namespace slmf::kernel {

struct LpRow {
  std::vector<Term> terms;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
};

// minimize objective^T x  s.t.  rows,  lower <= x <= upper.
struct LpProblem {
  Vector objective;
  Vector lower;
  Vector upper;
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int add_var(double cost, double lo, double hi);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::NumericalFailure;
  Vector primal;
  // duals[i] is the multiplier of row i: objective = duals^T rhs + sum_j
  // reduced_costs[j] * primal[j] at optimality.
  Vector duals;
  Vector reduced_costs;
  double objective = 0.0;
  long iterations = 0;
};

struct LpOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-7;
  long max_iterations = 200000;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
  int refactor_every = 400;
  // Parallel pivots only pay off on large tableaus.
  bool parallel = true;
  long parallel_threshold = 60000;
  // Iteration trace (one line per pivot) when non-null.
  std::ostream* trace = nullptr;
};

enum class NonbasicAt : std::uint8_t { Lower, Upper, Zero };

// Column ids: structural j in [0, n), slack of row i is n + i.
struct Basis {
  std::vector<int> basic;
  std::vector<NonbasicAt> state;
};

namespace detail {

// Gauss-Jordan pivot on tableau rows. The serial version is the reference;
// the OpenMP version must produce bit-identical rows.
void pivot_serial(std::span<Vector> rows, Vector& rhs, Vector& cost_row, int r, int q);
void pivot_parallel(std::span<Vector> rows, Vector& rhs, Vector& cost_row, int r, int q);

}  // namespace detail

// Tableau simplex supporting warm starts by bound changes and appended rows,
// the two modifications branch-and-bound and cutting planes perform. One
// instance per thread.
class DenseSimplex {
 public:
  explicit DenseSimplex(const LpProblem& problem, LpOptions options = {});

  LpStatus solve();
  LpResult result() const;

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }
  double value(int j) const { return x_[j]; }
  std::span<const double> values() const { return {x_.data(), static_cast<std::size_t>(n_)}; }
  double objective_value() const;
  long iterations() const { return iterations_; }
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  // Solves past this point stop with IterationLimit.
  void set_deadline(std::chrono::steady_clock::time_point t) { deadline_ = t; }

  void set_bounds(int j, double lo, double hi);
  // Replaces the structural costs; the current basis stays primal feasible.
  void set_objective(const Vector& costs);
  // Appends a row; its slack enters the basis. Returns the row index.
  int add_row(const LpRow& row);

  Basis basis() const;
  // Installs a basis recorded earlier (rows appended since become slack-basic).
  void load_basis(const Basis& b);

 private:
  bool is_fixed(int j) const { return lo_[j] == hi_[j]; }
  double nonbasic_value(int j) const;
  void place_nonbasic(int j);
  void recompute_basic_values();
  void recompute_reduced_costs(const Vector& costs);
  void refactor();
  void pivot(int r, int q);
  bool primal_feasible() const;
  bool dual_feasible() const;
  // Largest |a_i^T x + s_i - b_i| / max(1, |b_i|) over the original rows.
  double row_residual() const;
  // Checked every 32 iterations to keep clock reads cheap.
  bool out_of_time() const;
  double infeasibility(int r) const;
  LpStatus primal_phase(bool phase_one);
  LpStatus dual_phase();
  void trace(const char* phase, int r, int q) const;

  LpOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<LpRow> rows_;
  Vector cost_;  // structural + slack (slack costs are zero)
  Vector lo_, hi_;
  std::vector<Vector> tab_;  // m x (n + m)
  Vector rhs_;               // B^{-1} b
  Vector d_;                 // reduced costs
  std::vector<int> basis_;   // per tableau row
  std::vector<int> pos_;     // per column: tableau row, or -1
  std::vector<NonbasicAt> state_;
  Vector x_;
  long iterations_ = 0;
  std::chrono::steady_clock::time_point deadline_ = std::chrono::steady_clock::time_point::max();
  long since_refactor_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
};

LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

// weight * (sum coef * var)^2, weight >= 0.
struct ConvexTerm {
  double weight = 0.0;
  std::vector<Term> direction;
};

struct ConvexOptions {
  // Stop when true objective - relaxation bound <= tol * (1 + |objective|).
  double tol = 1e-9;
  int max_iterations = 200;
  // Finish with an exact KKT solve on the detected active set.
  bool polish = false;
  LpOptions lp;
};

enum class ConvexStatus { Optimal, Infeasible, Unbounded, NotConverged, NumericalFailure };

const char* to_string(ConvexStatus s);

struct ConvexResult {
  ConvexStatus status = ConvexStatus::NumericalFailure;
  Vector primal;
  double objective = 0.0;  // true objective at primal
  double bound = 0.0;      // last relaxation value (a valid lower bound)
  int iterations = 0;
  std::vector<double> bounds_history;
};

// Epigraph model: one variable t_k >= 0 per term, minimized together with the
// linear objective, and tangent cuts t_k >= 2w r(z0) r(z) - w r(z0)^2 added at
// each relaxation point. The LP bound is nondecreasing across rounds.
class KelleyModel {
 public:
  KelleyModel(const LpProblem& base, std::vector<ConvexTerm> terms, LpOptions options = {});

  DenseSimplex& lp() { return lp_; }
  const DenseSimplex& lp() const { return lp_; }
  int num_terms() const { return static_cast<int>(terms_.size()); }
  int num_base_vars() const { return base_vars_; }

  // True objective (linear + quadratic) at the current LP point.
  double true_objective() const;
  double relaxation_value() const { return lp_.objective_value(); }

  // Cut rounds until converged, infeasible, or the relaxation value reaches
  // `cutoff` (then Optimal is returned with bound >= cutoff). Past `deadline`
  // the last round's valid bound is returned as NotConverged.
  ConvexResult optimize(double tol, int max_rounds, double cutoff = kInf,
                        std::chrono::steady_clock::time_point deadline =
                            std::chrono::steady_clock::time_point::max());

 private:
  int add_cuts(double tol);

  std::vector<ConvexTerm> terms_;
  Vector linear_;
  int base_vars_ = 0;
  std::vector<int> t_cols_;
  // Cut violations below this are within LP feasibility noise and cannot
  // move the point.
  double cut_floor_ = 0.0;
  DenseSimplex lp_;
};

ConvexResult solve_convex(const LpProblem& problem, std::span<const ConvexTerm> terms,
                          const ConvexOptions& options = {});

}  // namespace slmf::kernel
