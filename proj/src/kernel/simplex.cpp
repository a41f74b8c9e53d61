#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slmf/kernel.hpp"

namespace slmf::kernel {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
    case LpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

int LpProblem::add_var(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return num_vars() - 1;
}

namespace {

void slack_bounds(Relation rel, double& lo, double& hi) {
  switch (rel) {
    case Relation::LessEqual: lo = 0.0; hi = kInf; break;
    case Relation::GreaterEqual: lo = -kInf; hi = 0.0; break;
    case Relation::Equal: lo = 0.0; hi = 0.0; break;
  }
}

double scaled_tol(double tol, double bound) { return tol * std::max(1.0, std::abs(bound)); }

}  // namespace

DenseSimplex::DenseSimplex(const LpProblem& p, LpOptions options) : opt_(options) {
  n_ = p.num_vars();
  m_ = static_cast<int>(p.rows.size());
  if (p.lower.size() != static_cast<std::size_t>(n_) || p.upper.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("LpProblem bounds do not match the objective length");
  }
  for (int j = 0; j < n_; ++j) {
    if (!std::isfinite(p.objective[j]) || std::isnan(p.lower[j]) || std::isnan(p.upper[j]) ||
        p.lower[j] > p.upper[j] || p.lower[j] == kInf || p.upper[j] == -kInf) {
      throw std::invalid_argument("LpProblem has invalid cost or bounds for variable " +
                                  std::to_string(j));
    }
  }
  rows_ = p.rows;
  const int cols = n_ + m_;
  cost_.assign(cols, 0.0);
  std::copy(p.objective.begin(), p.objective.end(), cost_.begin());
  lo_.assign(cols, 0.0);
  hi_.assign(cols, 0.0);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = p.lower[j];
    hi_[j] = p.upper[j];
  }
  tab_.assign(m_, Vector(cols, 0.0));
  rhs_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const auto& row = rows_[i];
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("LpProblem row has non-finite rhs");
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= n_ || !std::isfinite(t.coef)) {
        throw std::invalid_argument("LpProblem row references an invalid variable or coefficient");
      }
      tab_[i][t.var] += t.coef;
    }
    tab_[i][n_ + i] = 1.0;
    rhs_[i] = row.rhs;
    slack_bounds(row.rel, lo_[n_ + i], hi_[n_ + i]);
  }
  basis_.resize(m_);
  pos_.assign(cols, -1);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    pos_[n_ + i] = i;
  }
  state_.assign(cols, NonbasicAt::Lower);
  x_.assign(cols, 0.0);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  recompute_basic_values();
  d_ = cost_;
}

double DenseSimplex::nonbasic_value(int j) const {
  switch (state_[j]) {
    case NonbasicAt::Lower: return lo_[j];
    case NonbasicAt::Upper: return hi_[j];
    case NonbasicAt::Zero: return 0.0;
  }
  return 0.0;
}

void DenseSimplex::place_nonbasic(int j) {
  if (std::isfinite(lo_[j])) state_[j] = NonbasicAt::Lower;
  else if (std::isfinite(hi_[j])) state_[j] = NonbasicAt::Upper;
  else state_[j] = NonbasicAt::Zero;
  x_[j] = nonbasic_value(j);
}

void DenseSimplex::recompute_basic_values() {
  std::vector<int> nz;
  const int cols = n_ + m_;
  for (int j = 0; j < cols; ++j) {
    if (pos_[j] < 0) {
      x_[j] = nonbasic_value(j);
      if (x_[j] != 0.0) nz.push_back(j);
    }
  }
  for (int i = 0; i < m_; ++i) {
    double v = rhs_[i];
    const Vector& row = tab_[i];
    for (int j : nz) v -= row[j] * x_[j];
    x_[basis_[i]] = v;
  }
}

void DenseSimplex::recompute_reduced_costs(const Vector& costs) {
  d_ = costs;
  for (int i = 0; i < m_; ++i) {
    const double cb = costs[basis_[i]];
    if (cb == 0.0) continue;
    const Vector& row = tab_[i];
    for (int j = 0; j < n_ + m_; ++j) d_[j] -= cb * row[j];
  }
  for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

void DenseSimplex::refactor() {
  const int cols = n_ + m_;
  std::vector<Vector> M(m_, Vector(cols, 0.0));
  Vector b(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (const auto& t : rows_[i].terms) M[i][t.var] += t.coef;
    M[i][n_ + i] = 1.0;
    b[i] = rows_[i].rhs;
  }
  Vector dummy(cols, 0.0);
  std::vector<int> wanted = basis_;
  std::vector<int> assigned(m_, -1);
  std::vector<char> is_basic(cols, 0);
  for (int c : wanted) {
    int best = -1;
    double mag = 1e-10;
    for (int p = 0; p < m_; ++p) {
      if (assigned[p] < 0 && std::abs(M[p][c]) > mag) {
        mag = std::abs(M[p][c]);
        best = p;
      }
    }
    if (best < 0) continue;  // dependent column: leaves the basis
    detail::pivot_serial(M, b, dummy, best, c);
    assigned[best] = c;
    is_basic[c] = 1;
  }
  for (int p = 0; p < m_; ++p) {
    if (assigned[p] >= 0) continue;
    int best = -1;
    double mag = 0.0;
    for (int k = 0; k < m_; ++k) {
      const int s = n_ + k;
      if (!is_basic[s] && std::abs(M[p][s]) > mag) {
        mag = std::abs(M[p][s]);
        best = s;
      }
    }
    if (best < 0) throw std::runtime_error("simplex refactorization lost rank");
    detail::pivot_serial(M, b, dummy, p, best);
    assigned[p] = best;
    is_basic[best] = 1;
  }
  tab_ = std::move(M);
  rhs_ = std::move(b);
  basis_ = assigned;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
  for (int j = 0; j < cols; ++j) {
    if (pos_[j] >= 0) continue;
    const bool ok = (state_[j] == NonbasicAt::Lower && std::isfinite(lo_[j])) ||
                    (state_[j] == NonbasicAt::Upper && std::isfinite(hi_[j])) ||
                    (state_[j] == NonbasicAt::Zero && !std::isfinite(lo_[j]) &&
                     !std::isfinite(hi_[j]));
    if (!ok) place_nonbasic(j);
  }
  recompute_reduced_costs(cost_);
  recompute_basic_values();
  since_refactor_ = 0;
}

void DenseSimplex::pivot(int r, int q) {
  const int leaving = basis_[r];
  const long work = static_cast<long>(m_) * (n_ + m_);
  if (opt_.parallel && work >= opt_.parallel_threshold) {
    detail::pivot_parallel(tab_, rhs_, d_, r, q);
  } else {
    detail::pivot_serial(tab_, rhs_, d_, r, q);
  }
  basis_[r] = q;
  pos_[q] = r;
  pos_[leaving] = -1;
  d_[q] = 0.0;
  ++iterations_;
  ++since_refactor_;
}

double DenseSimplex::infeasibility(int r) const {
  const int b = basis_[r];
  const double v = x_[b];
  if (v < lo_[b] - scaled_tol(opt_.primal_tol, lo_[b])) return lo_[b] - v;
  if (v > hi_[b] + scaled_tol(opt_.primal_tol, hi_[b])) return v - hi_[b];
  return 0.0;
}

bool DenseSimplex::primal_feasible() const {
  for (int r = 0; r < m_; ++r) {
    if (infeasibility(r) > 0.0) return false;
  }
  return true;
}

bool DenseSimplex::dual_feasible() const {
  const double tol = opt_.dual_tol;
  for (int j = 0; j < n_ + m_; ++j) {
    if (pos_[j] >= 0 || is_fixed(j)) continue;
    switch (state_[j]) {
      case NonbasicAt::Lower: if (d_[j] < -tol) return false; break;
      case NonbasicAt::Upper: if (d_[j] > tol) return false; break;
      case NonbasicAt::Zero: if (std::abs(d_[j]) > tol) return false; break;
    }
  }
  return true;
}

void DenseSimplex::trace(const char* phase, int r, int q) const {
  if (opt_.trace == nullptr) return;
  *opt_.trace << "iter=" << iterations_ << " phase=" << phase << " enter=" << q
              << " leave_row=" << r << " obj=" << objective_value() << (bland_ ? " bland" : "")
              << "\n";
}

LpStatus DenseSimplex::primal_phase(bool phase_one) {
  const int cols = n_ + m_;
  const double ptol = opt_.primal_tol;
  const double dtol = opt_.dual_tol;
  Vector phase_costs;
  Vector saved_d;
  for (;;) {
    if (iterations_ >= opt_.max_iterations || out_of_time()) return LpStatus::IterationLimit;
    if (since_refactor_ >= opt_.refactor_every) refactor();

    if (phase_one) {
      phase_costs.assign(cols, 0.0);
      bool any = false;
      for (int r = 0; r < m_; ++r) {
        const int b = basis_[r];
        if (x_[b] < lo_[b] - scaled_tol(ptol, lo_[b])) {
          phase_costs[b] = -1.0;
          any = true;
        } else if (x_[b] > hi_[b] + scaled_tol(ptol, hi_[b])) {
          phase_costs[b] = 1.0;
          any = true;
        }
      }
      if (!any) return LpStatus::Optimal;
      saved_d = std::move(d_);
      recompute_reduced_costs(phase_costs);
      std::swap(d_, saved_d);  // d_ keeps true costs, saved_d holds phase costs
    }
    const Vector& d = phase_one ? saved_d : d_;

    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < cols; ++j) {
      if (pos_[j] >= 0 || is_fixed(j)) continue;
      const double dj = d[j];
      int s = 0;
      switch (state_[j]) {
        case NonbasicAt::Lower: if (dj < -dtol) s = 1; break;
        case NonbasicAt::Upper: if (dj > dtol) s = -1; break;
        case NonbasicAt::Zero: s = dj < -dtol ? 1 : (dj > dtol ? -1 : 0); break;
      }
      if (s == 0) continue;
      if (bland_) {
        q = j;
        dir = s;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
        dir = s;
      }
    }
    if (q < 0) return phase_one ? LpStatus::Infeasible : LpStatus::Optimal;

    // Harris two-pass ratio test; Bland mode uses exact ratios and the
    // smallest basic index.
    auto limit = [&](int r, double slack_tol) {
      const double a = tab_[r][q];
      if (std::abs(a) <= opt_.pivot_tol) return kInf;
      const double rate = -dir * a;
      const int b = basis_[r];
      const double v = x_[b];
      if (phase_one && v < lo_[b] - scaled_tol(ptol, lo_[b])) {
        return rate > 0 ? (lo_[b] - v + slack_tol) / rate : kInf;
      }
      if (phase_one && v > hi_[b] + scaled_tol(ptol, hi_[b])) {
        return rate < 0 ? (v - hi_[b] + slack_tol) / -rate : kInf;
      }
      if (rate < 0 && std::isfinite(lo_[b])) return std::max(0.0, v - lo_[b] + slack_tol) / -rate;
      if (rate > 0 && std::isfinite(hi_[b])) return std::max(0.0, hi_[b] - v + slack_tol) / rate;
      return kInf;
    };
    double tmax = kInf;
    for (int r = 0; r < m_; ++r) tmax = std::min(tmax, limit(r, bland_ ? 0.0 : ptol));
    const double range = (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) ? hi_[q] - lo_[q] : kInf;

    int leave = -1;
    double t = kInf;
    if (std::isfinite(tmax)) {
      double best_alpha = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double lim = limit(r, 0.0);
        if (!(lim <= tmax)) continue;
        const double a = std::abs(tab_[r][q]);
        if (bland_) {
          if (leave < 0 || lim < t || (lim == t && basis_[r] < basis_[leave])) {
            leave = r;
            t = lim;
          }
        } else if (a > best_alpha) {
          best_alpha = a;
          leave = r;
          t = lim;
        }
      }
    }
    if (leave < 0 && !std::isfinite(range)) {
      return phase_one ? LpStatus::NumericalFailure : LpStatus::Unbounded;
    }
    t = std::max(t, 0.0);
    const bool flip = std::isfinite(range) && (leave < 0 || range <= t);
    const double step = flip ? range : t;

    for (int r = 0; r < m_; ++r) {
      const double a = tab_[r][q];
      if (a != 0.0) x_[basis_[r]] -= dir * a * step;
    }
    x_[q] += dir * step;

    if (step <= 1e-12) {
      if (++degenerate_run_ > opt_.bland_after) bland_ = true;
    } else {
      degenerate_run_ = 0;
      bland_ = false;
    }

    if (flip) {
      state_[q] = dir > 0 ? NonbasicAt::Upper : NonbasicAt::Lower;
      x_[q] = nonbasic_value(q);
      ++iterations_;
      trace(phase_one ? "P1-flip" : "P2-flip", -1, q);
      continue;
    }
    const int b = basis_[leave];
    const double rate = -dir * tab_[leave][q];
    const double v = x_[b];
    bool at_lower = rate < 0;
    if (phase_one) {
      // Infeasible variables leave at the bound they were moving toward.
      if (std::abs(v - lo_[b]) <= std::abs(v - hi_[b])) at_lower = std::isfinite(lo_[b]);
      else at_lower = !std::isfinite(hi_[b]);
    }
    state_[b] = at_lower ? NonbasicAt::Lower : NonbasicAt::Upper;
    if (state_[b] == NonbasicAt::Lower && !std::isfinite(lo_[b])) state_[b] = NonbasicAt::Upper;
    if (state_[b] == NonbasicAt::Upper && !std::isfinite(hi_[b])) state_[b] = NonbasicAt::Lower;
    pivot(leave, q);
    x_[b] = nonbasic_value(b);
    trace(phase_one ? "P1" : "P2", leave, q);
  }
}

bool DenseSimplex::out_of_time() const {
  return (iterations_ & 31) == 0 && std::chrono::steady_clock::now() > deadline_;
}

LpStatus DenseSimplex::dual_phase() {
  const int cols = n_ + m_;
  const double dtol = opt_.dual_tol;
  for (;;) {
    if (iterations_ >= opt_.max_iterations || out_of_time()) return LpStatus::IterationLimit;
    if (since_refactor_ >= opt_.refactor_every) refactor();

    int r = -1;
    double worst = 0.0;
    for (int rr = 0; rr < m_; ++rr) {
      const double viol = infeasibility(rr);
      if (viol <= 0.0) continue;
      if (bland_) {
        if (r < 0 || basis_[rr] < basis_[r]) r = rr;
      } else if (viol > worst) {
        worst = viol;
        r = rr;
      }
    }
    if (r < 0) return LpStatus::Optimal;

    const int b = basis_[r];
    const bool below = x_[b] < lo_[b];
    const double target = below ? lo_[b] : hi_[b];
    const Vector& row = tab_[r];

    auto eligible = [&](int j) {
      if (pos_[j] >= 0 || is_fixed(j)) return false;
      const double a = row[j];
      if (std::abs(a) <= opt_.pivot_tol) return false;
      switch (state_[j]) {
        case NonbasicAt::Lower: return below ? a < 0 : a > 0;
        case NonbasicAt::Upper: return below ? a > 0 : a < 0;
        case NonbasicAt::Zero: return true;
      }
      return false;
    };
    auto dual_slack = [&](int j) {
      switch (state_[j]) {
        case NonbasicAt::Lower: return std::max(d_[j], 0.0);
        case NonbasicAt::Upper: return std::max(-d_[j], 0.0);
        case NonbasicAt::Zero: return std::abs(d_[j]);
      }
      return 0.0;
    };

    double rmax = kInf;
    for (int j = 0; j < cols; ++j) {
      if (eligible(j)) rmax = std::min(rmax, (dual_slack(j) + (bland_ ? 0.0 : dtol)) / std::abs(row[j]));
    }
    if (!std::isfinite(rmax)) return LpStatus::Infeasible;
    int q = -1;
    double best_alpha = 0.0;
    double best_ratio = kInf;
    for (int j = 0; j < cols; ++j) {
      if (!eligible(j)) continue;
      const double ratio = dual_slack(j) / std::abs(row[j]);
      if (ratio > rmax) continue;
      if (bland_) {
        if (ratio < best_ratio) {
          best_ratio = ratio;
          q = j;
        }
      } else if (std::abs(row[j]) > best_alpha) {
        best_alpha = std::abs(row[j]);
        best_ratio = ratio;
        q = j;
      }
    }

    const double delta = (x_[b] - target) / row[q];
    for (int rr = 0; rr < m_; ++rr) {
      const double a = tab_[rr][q];
      if (a != 0.0) x_[basis_[rr]] -= a * delta;
    }
    x_[q] += delta;

    if (best_ratio <= 1e-12) {
      if (++degenerate_run_ > opt_.bland_after) bland_ = true;
    } else {
      degenerate_run_ = 0;
      bland_ = false;
    }
    state_[b] = below ? NonbasicAt::Lower : NonbasicAt::Upper;
    pivot(r, q);
    x_[b] = target;
    trace("D", r, q);
  }
}

LpStatus DenseSimplex::solve() {
  bland_ = false;
  degenerate_run_ = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) refactor();
    recompute_basic_values();
    if (!primal_feasible()) {
      if (dual_feasible()) {
        const LpStatus st = dual_phase();
        if (st == LpStatus::IterationLimit) return st;
        if (st == LpStatus::Infeasible) {
          // Confirm on a fresh factorization before declaring infeasibility.
          refactor();
          if (!dual_feasible()) continue;
          const LpStatus again = dual_phase();
          if (again == LpStatus::Infeasible || again == LpStatus::IterationLimit) return again;
        }
      }
      if (!primal_feasible()) {
        const LpStatus st = primal_phase(true);
        if (st != LpStatus::Optimal) {
          if (st == LpStatus::NumericalFailure) continue;
          return st;
        }
      }
    }
    const LpStatus st = primal_phase(false);
    if (st != LpStatus::Optimal) return st;
    recompute_basic_values();
    // The updated tableau can drift from the original rows; only trust it
    // when the point still satisfies them.
    if (row_residual() > 1e-7) continue;
    if (primal_feasible() && dual_feasible()) return LpStatus::Optimal;
  }
  return LpStatus::NumericalFailure;
}

double DenseSimplex::row_residual() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    double lhs = x_[n_ + i];
    for (const auto& t : rows_[i].terms) lhs += t.coef * x_[t.var];
    worst = std::max(worst, std::abs(lhs - rows_[i].rhs) / std::max(1.0, std::abs(rows_[i].rhs)));
  }
  return worst;
}

double DenseSimplex::objective_value() const {
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return v;
}

void DenseSimplex::set_bounds(int j, double lo, double hi) {
  if (j < 0 || j >= n_ + m_ || lo > hi || std::isnan(lo) || std::isnan(hi)) {
    throw std::invalid_argument("set_bounds: invalid variable or bounds");
  }
  lo_[j] = lo;
  hi_[j] = hi;
  if (pos_[j] >= 0) return;
  const double old = x_[j];
  const bool keep = (state_[j] == NonbasicAt::Lower && std::isfinite(lo)) ||
                    (state_[j] == NonbasicAt::Upper && std::isfinite(hi)) ||
                    (state_[j] == NonbasicAt::Zero && !std::isfinite(lo) && !std::isfinite(hi));
  if (!keep) place_nonbasic(j);
  const double now = nonbasic_value(j);
  x_[j] = now;
  if (now != old) {
    const double delta = now - old;
    for (int r = 0; r < m_; ++r) {
      const double a = tab_[r][j];
      if (a != 0.0) x_[basis_[r]] -= a * delta;
    }
  }
}

void DenseSimplex::set_objective(const Vector& costs) {
  if (static_cast<int>(costs.size()) != n_) {
    throw std::invalid_argument("set_objective: wrong length");
  }
  std::fill(cost_.begin(), cost_.end(), 0.0);
  std::copy(costs.begin(), costs.end(), cost_.begin());
  recompute_reduced_costs(cost_);
}

int DenseSimplex::add_row(const LpRow& row) {
  const int slack = n_ + m_;
  for (auto& t : tab_) t.push_back(0.0);
  cost_.push_back(0.0);
  d_.push_back(0.0);
  double lo = 0.0;
  double hi = 0.0;
  slack_bounds(row.rel, lo, hi);
  lo_.push_back(lo);
  hi_.push_back(hi);
  state_.push_back(NonbasicAt::Lower);
  pos_.push_back(-1);
  x_.push_back(0.0);
  rows_.push_back(row);

  Vector nr(slack + 1, 0.0);
  for (const auto& t : row.terms) nr[t.var] += t.coef;
  nr[slack] = 1.0;
  double nb = row.rhs;
  for (int k = 0; k < m_; ++k) {
    const double f = nr[basis_[k]];
    if (f == 0.0) continue;
    const Vector& tr = tab_[k];
    for (int j = 0; j <= slack; ++j) nr[j] -= f * tr[j];
    nb -= f * rhs_[k];
    nr[basis_[k]] = 0.0;
  }
  double v = nb;
  for (int j = 0; j < slack; ++j) {
    if (pos_[j] < 0 && nr[j] != 0.0) v -= nr[j] * x_[j];
  }
  tab_.push_back(std::move(nr));
  rhs_.push_back(nb);
  basis_.push_back(slack);
  pos_[slack] = m_;
  x_[slack] = v;
  ++m_;
  return m_ - 1;
}

Basis DenseSimplex::basis() const { return {basis_, state_}; }

void DenseSimplex::load_basis(const Basis& b) {
  const int cols = n_ + m_;
  if (static_cast<int>(b.basic.size()) > m_ || static_cast<int>(b.state.size()) > cols) {
    throw std::invalid_argument("load_basis: basis is larger than the problem");
  }
  basis_ = b.basic;
  for (int i = static_cast<int>(b.basic.size()); i < m_; ++i) basis_.push_back(n_ + i);
  state_ = b.state;
  state_.resize(cols, NonbasicAt::Lower);
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
  refactor();
}

LpResult DenseSimplex::result() const {
  LpResult r;
  r.primal.assign(x_.begin(), x_.begin() + n_);
  r.duals.resize(m_);
  for (int i = 0; i < m_; ++i) r.duals[i] = -d_[n_ + i];
  r.reduced_costs.assign(d_.begin(), d_.begin() + n_);
  r.objective = objective_value();
  r.iterations = iterations_;
  return r;
}

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  DenseSimplex s(problem, options);
  const LpStatus st = s.solve();
  LpResult r = s.result();
  r.status = st;
  return r;
}

}  // namespace slmf::kernel
