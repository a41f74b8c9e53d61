// Solver-internal form of a SingleLevelProblem: an LP over the variable table
// (plus auxiliaries for composite pair members), convex terms, and pairs whose
// members are single variables with a known zero value.
#pragma once

#include <string>
#include <vector>

#include "slmf/kernel.hpp"
#include "slmf/problem.hpp"

namespace slmf::solver::detail {

// coef * (var - zero_at)
struct Member {
  int var = 0;
  double zero_at = 0.0;
  double coef = 1.0;
  double value(const Vector& z) const { return coef * (z[var] - zero_at); }
};

struct Pair {
  Member a;
  Member b;
  bool has_binary = false;
};

struct Compiled {
  kernel::LpProblem lp;  // minimization, bounds already propagated
  std::vector<kernel::ConvexTerm> quad;
  double sign = 1.0;      // reported = sign * internal
  double constant = 0.0;  // internal constant
  std::vector<Pair> pairs;
  std::vector<bool> binary;
  int num_original = 0;
  bool infeasible = false;  // contradiction found while compiling

  double internal_objective(const Vector& z) const;
};

Compiled compile(const SingleLevelProblem& problem);

// Fixes the partner of every pair member that the bounds keep away from zero.
// Returns false on a contradiction.
bool propagate(const Compiled& c, Vector& lo, Vector& hi);

// A pair is settled when some member is fixed at its zero value.
bool settled(const Pair& p, const Vector& lo, const Vector& hi);

// Bound changes relative to the root: (var, lo, hi).
struct BoundChange {
  int var;
  double lo;
  double hi;
};

std::vector<BoundChange> diff(const Vector& root_lo, const Vector& root_hi, const Vector& lo,
                              const Vector& hi);

Solution make_solution(const SingleLevelProblem& problem, const Compiled& c);

}  // namespace slmf::solver::detail
