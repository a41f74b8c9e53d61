#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "compiled.hpp"
#include "slmf/solver.hpp"

namespace slmf::solver {

using namespace detail;

namespace {

using Clock = std::chrono::steady_clock;

struct Disjunction {
  bool binary = false;
  int index = 0;  // variable for binaries, pair index otherwise
};

struct Best {
  double value = kInf;  // internal
  std::vector<double> point;
  long nodes = 0;
  bool timed_out = false;
};

bool is_settled(const Compiled& c, const Disjunction& d, const Vector& lo, const Vector& hi) {
  if (d.binary) return lo[d.index] == hi[d.index];
  return settled(c.pairs[d.index], lo, hi);
}

// Fixes side 0 or 1 of a disjunction; false on contradiction.
bool take_side(const Compiled& c, const Disjunction& d, int side, Vector& lo, Vector& hi) {
  int var;
  double v;
  if (d.binary) {
    var = d.index;
    v = side;
  } else {
    const Member& m = side == 0 ? c.pairs[d.index].a : c.pairs[d.index].b;
    var = m.var;
    v = m.zero_at;
  }
  if (lo[var] > v + 1e-12 || hi[var] < v - 1e-12) return false;
  lo[var] = hi[var] = v;
  return propagate(c, lo, hi);
}

class Walker {
 public:
  Walker(const SingleLevelProblem& problem, const Compiled& c,
         const std::vector<Disjunction>& disj, const BnbConfig& cfg, Clock::time_point deadline,
         std::atomic<bool>& stop)
      : problem_(problem),
        c_(c),
        disj_(disj),
        cfg_(cfg),
        deadline_(deadline),
        stop_(stop),
        model_(c.lp, c.quad, cfg.lp),
        cur_lo_(c.lp.lower),
        cur_hi_(c.lp.upper) {}

  void walk(int level, Vector lo, Vector hi) {
    if (stop_.load(std::memory_order_relaxed)) return;
    if (Clock::now() > deadline_) {
      stop_ = true;
      best_.timed_out = true;
      return;
    }
    install(lo, hi);
    ++best_.nodes;
    if (level < static_cast<int>(disj_.size())) {
      if (model_.lp().solve() == kernel::LpStatus::Infeasible) return;
      const Disjunction& d = disj_[level];
      if (is_settled(c_, d, lo, hi)) {
        walk(level + 1, std::move(lo), std::move(hi));
        return;
      }
      for (int side = 0; side < 2; ++side) {
        Vector l = lo;
        Vector h = hi;
        if (take_side(c_, d, side, l, h)) walk(level + 1, std::move(l), std::move(h));
      }
      return;
    }
    const kernel::ConvexResult res = model_.optimize(cfg_.kelley_tol, cfg_.kelley_rounds);
    if (res.primal.empty() || res.status == kernel::ConvexStatus::Infeasible) return;
    if (res.status == kernel::ConvexStatus::Unbounded) {
      unbounded_ = true;
      return;
    }
    const double f = res.objective + c_.constant;
    if (f < best_.value) {
      std::vector<double> vals(res.primal.begin(), res.primal.begin() + c_.num_original);
      if (!check_feasibility(problem_, vals, std::max(10.0 * cfg_.feas_tol, 1e-7)).ok) return;
      best_.value = f;
      best_.point = std::move(vals);
    }
  }

  Best& best() { return best_; }
  bool unbounded() const { return unbounded_; }

 private:
  void install(const Vector& lo, const Vector& hi) {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (lo[j] != cur_lo_[j] || hi[j] != cur_hi_[j]) {
        model_.lp().set_bounds(static_cast<int>(j), lo[j], hi[j]);
        cur_lo_[j] = lo[j];
        cur_hi_[j] = hi[j];
      }
    }
  }

  const SingleLevelProblem& problem_;
  const Compiled& c_;
  const std::vector<Disjunction>& disj_;
  const BnbConfig& cfg_;
  Clock::time_point deadline_;
  std::atomic<bool>& stop_;
  kernel::KelleyModel model_;
  Vector cur_lo_, cur_hi_;
  Best best_;
  bool unbounded_ = false;
};

std::vector<Disjunction> disjunctions(const Compiled& c) {
  std::vector<Disjunction> d;
  for (int j = 0; j < c.lp.num_vars(); ++j) {
    if (c.binary[j] && c.lp.lower[j] != c.lp.upper[j]) d.push_back({true, j});
  }
  for (int k = 0; k < static_cast<int>(c.pairs.size()); ++k) {
    const Pair& p = c.pairs[k];
    if (!p.has_binary && !settled(p, c.lp.lower, c.lp.upper)) d.push_back({false, k});
  }
  return d;
}

Solution finish(Solution sol, const Compiled& c, Best best, bool unbounded, Clock::time_point t0) {
  sol.nodes = best.nodes;
  sol.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  if (unbounded) {
    sol.status = SolveStatus::Unbounded;
    return sol;
  }
  if (std::isfinite(best.value)) {
    sol.values = std::move(best.point);
    sol.objective = c.sign * best.value;
    sol.bound = best.timed_out ? -c.sign * kInf : sol.objective;
    sol.gap = best.timed_out ? kInf : 0.0;
    sol.status = best.timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  } else {
    sol.objective = sol.bound = std::numeric_limits<double>::quiet_NaN();
    sol.status = best.timed_out ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
  }
  return sol;
}

Solution enumerate_plain(const SingleLevelProblem& problem, const BnbConfig& cfg, bool parallel,
                         int extra_count) {
  const auto t0 = Clock::now();
  const Compiled c = compile(problem);
  Solution sol = make_solution(problem, c);
  if (c.infeasible) return finish(sol, c, {}, false, t0);
  const std::vector<Disjunction> disj = disjunctions(c);
  const int count = static_cast<int>(disj.size()) + extra_count;
  if (count > cfg.enumeration_cap) {
    throw std::length_error("enumeration needs " + std::to_string(count) +
                            " disjunctions, above the cap of " +
                            std::to_string(cfg.enumeration_cap));
  }
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(cfg.time_limit));
  std::atomic<bool> stop{false};

  // Split on the first few disjunctions; each prefix is an independent task.
  const int split = parallel ? std::min<int>(static_cast<int>(disj.size()), 6) : 0;
  const int tasks = 1 << split;
  std::vector<Best> results(tasks);
  std::vector<char> unbounded(tasks, 0);
#pragma omp parallel for schedule(dynamic) if (parallel && tasks > 1)
  for (int t = 0; t < tasks; ++t) {
    Vector lo = c.lp.lower;
    Vector hi = c.lp.upper;
    bool ok = true;
    for (int l = 0; l < split && ok; ++l) {
      const int side = (t >> (split - 1 - l)) & 1;
      if (is_settled(c, disj[l], lo, hi)) {
        ok = side == 0;  // both sides would repeat the same subtree
        continue;
      }
      ok = take_side(c, disj[l], side, lo, hi);
    }
    if (!ok) continue;
    Walker w(problem, c, disj, cfg, deadline, stop);
    w.walk(split, std::move(lo), std::move(hi));
    results[t] = std::move(w.best());
    unbounded[t] = w.unbounded();
  }
  Best best;
  bool any_unbounded = false;
  for (int t = 0; t < tasks; ++t) {
    best.nodes += results[t].nodes;
    best.timed_out |= results[t].timed_out;
    any_unbounded |= unbounded[t] != 0;
    if (results[t].value < best.value) {
      best.value = results[t].value;
      best.point = std::move(results[t].point);
    }
  }
  return finish(sol, c, std::move(best), any_unbounded, t0);
}

// nu * u terms: any feasible continuous u can be replaced by its 0/1
// normalization (nu rescaled on the support), so enumerating u in {0, 1}
// covers the feasible values.
Solution enumerate_bilinear(const SingleLevelProblem& problem, const BnbConfig& cfg) {
  const auto t0 = Clock::now();
  std::vector<int> uvars;
  for (const auto& b : problem.bilinear) {
    const auto& v = problem.vars[b.var_b];
    if (v.lower < 0.0 || v.upper > 1.0) {
      throw std::invalid_argument("bilinear factor " + v.name + " is not bounded in [0, 1]");
    }
    if (std::find(uvars.begin(), uvars.end(), b.var_b) == uvars.end()) uvars.push_back(b.var_b);
  }
  const int nu = static_cast<int>(uvars.size());
  if (nu > cfg.enumeration_cap) {
    throw std::length_error("too many bilinear factors for enumeration");
  }
  auto substitute = [&](long mask) {
    SingleLevelProblem sub = problem;
    sub.bilinear.clear();
    std::vector<double> val(problem.num_vars(), 0.0);
    for (int k = 0; k < nu; ++k) {
      const double v = (mask >> k) & 1;
      val[uvars[k]] = v;
      sub.vars[uvars[k]].lower = sub.vars[uvars[k]].upper = v;
      sub.vars[uvars[k]].binary = false;
    }
    for (const auto& b : problem.bilinear) {
      if (val[b.var_b] != 0.0) sub.rows[b.row].terms.push_back({b.var_a, b.coef * val[b.var_b]});
    }
    return sub;
  };
  // The pattern with every factor at 1 has the most open disjunctions left.
  {
    const Compiled probe = compile(substitute((1L << nu) - 1));
    const Compiled probe0 = compile(substitute(0));
    const int rest = std::max(static_cast<int>(disjunctions(probe).size()),
                              static_cast<int>(disjunctions(probe0).size()));
    if (nu + rest > cfg.enumeration_cap) {
      throw std::length_error("enumeration needs " + std::to_string(nu + rest) +
                              " disjunctions, above the cap of " +
                              std::to_string(cfg.enumeration_cap));
    }
  }
  const long patterns = 1L << nu;
  std::vector<Solution> results(patterns);
#pragma omp parallel for schedule(dynamic)
  for (long mask = 0; mask < patterns; ++mask) {
    results[mask] = enumerate_plain(substitute(mask), cfg, false, 0);
  }
  Solution best;
  for (const auto& v : problem.vars) best.names.push_back(v.name);
  best.objective = best.bound = std::numeric_limits<double>::quiet_NaN();
  const double sign = sense_sign(problem.objective.sense);
  bool timed_out = false;
  long nodes = 0;
  for (long mask = 0; mask < patterns; ++mask) {
    const Solution& r = results[mask];
    nodes += r.nodes;
    if (r.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      best.nodes = nodes;
      return best;
    }
    timed_out |= r.status == SolveStatus::TimeLimit;
    if (!r.has_point()) continue;
    if (!best.has_point() || sign * r.objective < sign * best.objective) {
      best.values = r.values;
      best.objective = r.objective;
    }
  }
  best.nodes = nodes;
  best.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  if (best.has_point()) {
    best.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
    best.bound = timed_out ? -sign * kInf : best.objective;
    best.gap = timed_out ? kInf : 0.0;
  } else {
    best.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
  }
  return best;
}

}  // namespace

Solution enumerate(const SingleLevelProblem& problem, const BnbConfig& config) {
  if (!problem.bilinear.empty()) return enumerate_bilinear(problem, config);
  return enumerate_plain(problem, config, true, 0);
}

}  // namespace slmf::solver
