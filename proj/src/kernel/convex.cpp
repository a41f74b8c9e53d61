#include <algorithm>
#include <cmath>
#include <map>

#include "slmf/kernel.hpp"

namespace slmf::kernel {

const char* to_string(ConvexStatus s) {
  switch (s) {
    case ConvexStatus::Optimal: return "Optimal";
    case ConvexStatus::Infeasible: return "Infeasible";
    case ConvexStatus::Unbounded: return "Unbounded";
    case ConvexStatus::NotConverged: return "NotConverged";
    case ConvexStatus::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

namespace {

LpProblem with_epigraph(const LpProblem& base, const std::vector<ConvexTerm>& terms,
                        std::vector<int>& t_cols) {
  LpProblem p = base;
  t_cols.clear();
  for (const auto& term : terms) {
    if (!(term.weight >= 0.0) || !std::isfinite(term.weight)) {
      throw std::invalid_argument("convex term weight must be finite and nonnegative");
    }
    t_cols.push_back(p.add_var(1.0, 0.0, kInf));
  }
  return p;
}

double term_value(const ConvexTerm& t, std::span<const double> z) {
  double r = 0.0;
  for (const auto& e : t.direction) r += e.coef * z[e.var];
  return r;
}

double base_objective(const LpProblem& p, std::span<const ConvexTerm> terms,
                      std::span<const double> z) {
  double v = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) v += p.objective[j] * z[j];
  for (const auto& t : terms) {
    const double r = term_value(t, z);
    v += t.weight * r * r;
  }
  return v;
}

}  // namespace

KelleyModel::KelleyModel(const LpProblem& base, std::vector<ConvexTerm> terms, LpOptions options)
    : terms_(std::move(terms)),
      linear_(base.objective),
      base_vars_(base.num_vars()),
      cut_floor_(10.0 * options.primal_tol),
      lp_(with_epigraph(base, terms_, t_cols_), options) {}

double KelleyModel::true_objective() const {
  const auto z = lp_.values();
  double v = 0.0;
  for (int j = 0; j < base_vars_; ++j) v += linear_[j] * z[j];
  for (const auto& t : terms_) {
    const double r = term_value(t, z);
    v += t.weight * r * r;
  }
  return v;
}

int KelleyModel::add_cuts(double tol) {
  const auto z = lp_.values();
  std::vector<double> zc(z.begin(), z.end());
  int added = 0;
  for (int k = 0; k < num_terms(); ++k) {
    const auto& t = terms_[k];
    if (t.weight == 0.0) continue;
    const double r = term_value(t, zc);
    const double val = t.weight * r * r;
    if (val - zc[t_cols_[k]] <= tol * (1.0 + std::abs(val))) continue;
    LpRow row;
    row.terms.push_back({t_cols_[k], 1.0});
    for (const auto& e : t.direction) row.terms.push_back({e.var, -2.0 * t.weight * r * e.coef});
    row.rel = Relation::GreaterEqual;
    row.rhs = -val;
    lp_.add_row(row);
    ++added;
  }
  return added;
}

ConvexResult KelleyModel::optimize(double tol, int max_rounds, double cutoff,
                                   std::chrono::steady_clock::time_point deadline) {
  ConvexResult res;
  lp_.set_deadline(deadline);
  double radius = 1.0;
  for (int round = 0; round < max_rounds; ++round) {
    const LpStatus st = lp_.solve();
    res.iterations = round + 1;
    if (st == LpStatus::Infeasible) {
      res.status = ConvexStatus::Infeasible;
      return res;
    }
    if (st == LpStatus::Unbounded) {
      // The quadratic terms may still bound the problem: add tangents at
      // growing radius until either the LP is bounded or the radius is absurd.
      if (radius > 1e12 || terms_.empty()) {
        res.status = ConvexStatus::Unbounded;
        return res;
      }
      for (int k = 0; k < num_terms(); ++k) {
        const auto& t = terms_[k];
        if (t.weight == 0.0) continue;
        for (double s : {radius, -radius}) {
          LpRow row;
          row.terms.push_back({t_cols_[k], 1.0});
          for (const auto& e : t.direction) row.terms.push_back({e.var, -2.0 * t.weight * s * e.coef});
          row.rel = Relation::GreaterEqual;
          row.rhs = -t.weight * s * s;
          lp_.add_row(row);
        }
      }
      radius *= 8.0;
      continue;
    }
    if (st != LpStatus::Optimal) {
      res.status = st == LpStatus::IterationLimit ? ConvexStatus::NotConverged
                                                  : ConvexStatus::NumericalFailure;
      return res;
    }
    const double bound = relaxation_value();
    const double f = true_objective();
    res.bounds_history.push_back(bound);
    const auto z = lp_.values();
    res.primal.assign(z.begin(), z.begin() + base_vars_);
    res.objective = f;
    res.bound = std::min(bound, f);
    if (bound >= cutoff || f - bound <= tol * (1.0 + std::abs(f))) {
      res.status = ConvexStatus::Optimal;
      return res;
    }
    if (add_cuts(std::max(0.1 * tol, cut_floor_)) == 0) {
      res.status = ConvexStatus::Optimal;
      return res;
    }
    if (std::chrono::steady_clock::now() > deadline) break;
  }
  res.status = ConvexStatus::NotConverged;
  return res;
}

namespace {

// Exact KKT solve on the active set guessed from an approximate minimizer:
// stationarity c + Q z + A_act^T pi + sigma = 0 with sign-constrained
// multipliers, active rows as equalities, inactive rows kept as inequalities.
// Any feasible point of this LP is a global minimizer.
bool polish(const LpProblem& p, std::span<const ConvexTerm> terms, const Vector& approx,
            double active_tol, const LpOptions& lp_options, Vector& out) {
  const int n = p.num_vars();
  LpProblem k;
  for (int j = 0; j < n; ++j) k.add_var(0.0, p.lower[j], p.upper[j]);

  std::vector<std::map<int, double>> stat(n);
  for (const auto& t : terms) {
    for (const auto& a : t.direction) {
      for (const auto& b : t.direction) stat[a.var][b.var] += 2.0 * t.weight * a.coef * b.coef;
    }
  }
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& row = p.rows[i];
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * approx[t.var];
    const double scale = std::max(1.0, std::abs(row.rhs));
    const bool tight = std::abs(lhs - row.rhs) <= active_tol * scale;
    LpRow copy{row.terms, row.rel, row.rhs};
    if (row.rel == Relation::Equal || tight) {
      copy.rel = Relation::Equal;
      const double lo = row.rel == Relation::LessEqual ? 0.0 : -kInf;
      const double hi = row.rel == Relation::GreaterEqual ? 0.0 : kInf;
      const int pi = k.add_var(0.0, lo, hi);
      for (const auto& t : row.terms) stat[t.var][pi] += t.coef;
    }
    k.rows.push_back(std::move(copy));
  }
  for (int j = 0; j < n; ++j) {
    const double lo = p.lower[j];
    const double hi = p.upper[j];
    const bool at_lo = std::isfinite(lo) && std::abs(approx[j] - lo) <= active_tol * std::max(1.0, std::abs(lo));
    const bool at_hi = std::isfinite(hi) && std::abs(approx[j] - hi) <= active_tol * std::max(1.0, std::abs(hi));
    if (!at_lo && !at_hi) continue;
    double slo = 0.0;
    double shi = 0.0;
    if (at_lo && at_hi) {
      slo = -kInf;
      shi = kInf;
    } else if (at_lo) {
      slo = -kInf;
      k.lower[j] = k.upper[j] = lo;
    } else {
      shi = kInf;
      k.lower[j] = k.upper[j] = hi;
    }
    const int sigma = k.add_var(0.0, slo, shi);
    stat[j][sigma] += 1.0;
  }
  for (int j = 0; j < n; ++j) {
    LpRow row;
    for (const auto& [var, coef] : stat[j]) {
      if (coef != 0.0) row.terms.push_back({var, coef});
    }
    row.rel = Relation::Equal;
    row.rhs = -p.objective[j];
    k.rows.push_back(std::move(row));
  }
  LpOptions opt = lp_options;
  opt.trace = nullptr;
  const LpResult r = solve_lp(k, opt);
  if (r.status != LpStatus::Optimal) return false;
  out.assign(r.primal.begin(), r.primal.begin() + n);
  return true;
}

bool feasible(const LpProblem& p, const Vector& z, double tol) {
  for (int j = 0; j < p.num_vars(); ++j) {
    if (z[j] < p.lower[j] - tol * std::max(1.0, std::abs(p.lower[j]))) return false;
    if (z[j] > p.upper[j] + tol * std::max(1.0, std::abs(p.upper[j]))) return false;
  }
  for (const auto& row : p.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * z[t.var];
    const double s = tol * std::max(1.0, std::abs(row.rhs));
    if (row.rel != Relation::GreaterEqual && lhs > row.rhs + s) return false;
    if (row.rel != Relation::LessEqual && lhs < row.rhs - s) return false;
  }
  return true;
}

}  // namespace

ConvexResult solve_convex(const LpProblem& problem, std::span<const ConvexTerm> terms,
                          const ConvexOptions& options) {
  KelleyModel model(problem, std::vector<ConvexTerm>(terms.begin(), terms.end()), options.lp);
  ConvexResult res = model.optimize(options.tol, options.max_iterations);
  if (!options.polish || terms.empty()) return res;
  if (res.status != ConvexStatus::Optimal && res.status != ConvexStatus::NotConverged) return res;
  for (double active_tol : {1e-6, 1e-9, 1e-4}) {
    Vector z;
    if (!polish(problem, terms, res.primal, active_tol, options.lp, z)) continue;
    if (!feasible(problem, z, 1e-9)) continue;
    const double f = base_objective(problem, terms, z);
    if (f <= res.objective + 1e-9 * (1.0 + std::abs(f))) {
      res.primal = std::move(z);
      res.objective = f;
      res.bound = f;
      res.status = ConvexStatus::Optimal;
      break;
    }
  }
  return res;
}

}  // namespace slmf::kernel
