#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <queue>
#include <set>

#include "compiled.hpp"
#include "slmf/solver.hpp"

namespace slmf::solver {

using namespace detail;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_gap(double ub, double lb) {
  if (!std::isfinite(ub)) return kInf;
  return std::abs(ub - lb) / std::max(1.0, std::abs(ub));
}

struct Node {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double bound = -kInf;  // internal (minimization) value
  std::vector<BoundChange> changes;
};

struct WorseFirst {
  bool operator()(const Node& a, const Node& b) const {
    return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
  }
};

// Bounds from minimizing and maximizing each pair member over the LP
// relaxation, then a / U_a + b / U_b <= 1 for pairs whose members are
// nonnegative (after orientation) with finite ranges. Returns false when the
// relaxation is infeasible.
bool tighten_root(Compiled& c, const BnbConfig& cfg, Clock::time_point stop) {
  kernel::LpProblem feas = c.lp;
  std::fill(feas.objective.begin(), feas.objective.end(), 0.0);
  kernel::DenseSimplex lp(feas, cfg.lp);
  const kernel::LpStatus st = lp.solve();
  if (st == kernel::LpStatus::Infeasible) return false;
  if (st != kernel::LpStatus::Optimal) return true;

  std::set<int> seen;
  std::vector<int> vars;
  std::vector<std::vector<double>> zeros(c.lp.num_vars());
  for (const auto& p : c.pairs) {
    for (const Member* m : {&p.a, &p.b}) {
      zeros[m->var].push_back(m->zero_at);
      if (!c.binary[m->var] && seen.insert(m->var).second) vars.push_back(m->var);
    }
  }
  const int n = c.lp.num_vars();
  Vector cost(n, 0.0);
  for (int j : vars) {
    if (Clock::now() > stop) break;
    for (double dir : {1.0, -1.0}) {
      if (c.lp.lower[j] == c.lp.upper[j]) break;
      cost[j] = dir;
      lp.set_objective(cost);
      const kernel::LpStatus s = lp.solve();
      cost[j] = 0.0;
      if (s != kernel::LpStatus::Optimal) continue;
      const double val = lp.value(j);
      const double slack = 1e-7 * (1.0 + std::abs(val));
      double& lo = c.lp.lower[j];
      double& hi = c.lp.upper[j];
      if (dir > 0) {
        double nl = val - slack;
        for (double z : zeros[j]) {
          if (std::abs(val - z) <= 1e-9) nl = z;
        }
        lo = std::min(std::max(lo, nl), hi);
      } else {
        double nh = val + slack;
        for (double z : zeros[j]) {
          if (std::abs(val - z) <= 1e-9) nh = z;
        }
        hi = std::max(std::min(hi, nh), lo);
      }
      lp.set_bounds(j, lo, hi);
    }
  }
  if (!propagate(c, c.lp.lower, c.lp.upper)) return false;

  for (const auto& p : c.pairs) {
    if (settled(p, c.lp.lower, c.lp.upper) || p.a.var == p.b.var) continue;
    // Orientation s and range U with 0 <= s * (v - zero_at) <= U.
    auto orient = [&](const Member& m, double& s, double& U) {
      const double lo = c.lp.lower[m.var];
      const double hi = c.lp.upper[m.var];
      if (lo >= m.zero_at) {
        s = 1.0;
        U = hi - m.zero_at;
      } else if (hi <= m.zero_at) {
        s = -1.0;
        U = m.zero_at - lo;
      } else {
        return false;
      }
      return std::isfinite(U) && U > 1e-9;
    };
    double sa, ua, sb, ub;
    if (!orient(p.a, sa, ua) || !orient(p.b, sb, ub)) continue;
    kernel::LpRow row;
    row.terms = {{p.a.var, sa / ua}, {p.b.var, sb / ub}};
    row.rel = Relation::LessEqual;
    row.rhs = 1.0 + sa * p.a.zero_at / ua + sb * p.b.zero_at / ub;
    c.lp.rows.push_back(std::move(row));
  }
  return true;
}

class BranchAndBound {
 public:
  BranchAndBound(const SingleLevelProblem& problem, const BnbConfig& cfg)
      : problem_(problem), cfg_(cfg), start_(Clock::now()) {}

  Solution run() {
    c_ = compile(problem_);
    Solution sol = make_solution(problem_, c_);
    if (!c_.infeasible && cfg_.tighten_root) {
      const auto stop = start_ + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(0.25 * cfg_.time_limit));
      if (!tighten_root(c_, cfg_, stop)) c_.infeasible = true;
    }
    if (c_.infeasible) return finish(sol, false);

    root_lo_ = c_.lp.lower;
    root_hi_ = c_.lp.upper;
    kernel::KelleyModel model(c_.lp, c_.quad, cfg_.lp);
    model_ = &model;

    std::priority_queue<Node, std::vector<Node>, WorseFirst> open;
    std::optional<Node> dive = Node{next_id_++, -1, 0, -kInf, {}};
    bool stopped = false;
    while (dive || !open.empty()) {
      if (seconds_since(start_) > cfg_.time_limit || nodes_ >= cfg_.node_limit) {
        stopped = true;
        if (dive) open.push(std::move(*dive));
        break;
      }
      Node node;
      if (dive) {
        node = std::move(*dive);
        dive.reset();
      } else {
        node = open.top();
        open.pop();
      }
      if (node.bound >= cutoff()) {
        pruned_min_ = std::min(pruned_min_, node.bound);
        continue;
      }
      auto children = evaluate(node);
      if (children.unbounded) {
        sol.status = SolveStatus::Unbounded;
        sol.nodes = nodes_;
        sol.wall_time = seconds_since(start_);
        return sol;
      }
      if (children.first) dive = std::move(children.first);
      if (children.second) {
        if (dive) open.push(std::move(*children.second));
        else dive = std::move(children.second);
      }
      double frontier = dive ? dive->bound : kInf;
      if (!open.empty()) frontier = std::min(frontier, open.top().bound);
      maybe_log(std::isfinite(frontier) ? frontier : ub_);
    }
    double open_min = kInf;
    if (stopped && !open.empty()) open_min = open.top().bound;
    lb_floor_ = std::min(lb_floor_, open_min);
    return finish(sol, stopped);
  }

 private:
  struct Children {
    std::optional<Node> first;
    std::optional<Node> second;
    bool unbounded = false;
  };

  double cutoff() const {
    if (!std::isfinite(ub_)) return kInf;
    return ub_ - cfg_.gap_tol * std::max(1.0, std::abs(ub_));
  }

  void apply(const Node& node) {
    auto& lp = model_->lp();
    for (const auto& ch : applied_) lp.set_bounds(ch.var, root_lo_[ch.var], root_hi_[ch.var]);
    for (const auto& ch : node.changes) lp.set_bounds(ch.var, ch.lo, ch.hi);
    applied_ = node.changes;
  }

  std::optional<Node> child(const Node& parent, double bound, int var, double value) {
    Vector lo = root_lo_;
    Vector hi = root_hi_;
    for (const auto& ch : parent.changes) {
      lo[ch.var] = ch.lo;
      hi[ch.var] = ch.hi;
    }
    if (lo[var] > value + 1e-12 || hi[var] < value - 1e-12) return std::nullopt;
    lo[var] = hi[var] = value;
    if (!propagate(c_, lo, hi)) return std::nullopt;
    return Node{next_id_++, parent.id, parent.depth + 1, bound, diff(root_lo_, root_hi_, lo, hi)};
  }

  Children evaluate(const Node& node) {
    Children out;
    apply(node);
    ++nodes_;
    const kernel::ConvexResult res =
        model_->optimize(cfg_.kelley_tol, cfg_.kelley_rounds, cutoff() - c_.constant,
                         start_ + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(cfg_.time_limit)));
    if (cfg_.trace != nullptr) {
      const bool none = res.status == kernel::ConvexStatus::Infeasible || res.primal.empty();
      const double rel = none ? kInf : res.bound + c_.constant;
      cfg_.trace->push_back({node.id, node.parent, node.depth, rel, std::max(node.bound, rel)});
    }
    if (res.status == kernel::ConvexStatus::Infeasible) return out;
    if (res.status == kernel::ConvexStatus::Unbounded) {
      out.unbounded = true;
      return out;
    }
    if (res.primal.empty()) {
      // No usable point: keep the node's bound as an unresolved floor.
      lb_floor_ = std::min(lb_floor_, node.bound);
      return out;
    }
    const double lb = std::max(node.bound, res.bound + c_.constant);
    if (lb >= cutoff()) {
      pruned_min_ = std::min(pruned_min_, lb);
      return out;
    }
    const Vector& z = res.primal;
    const auto& lp = model_->lp();

    // Candidate selection: fractional binaries first (fixing one settles every
    // pair it belongs to), then the pair with the largest product.
    int bin_var = -1;
    double bin_score = cfg_.feas_tol;
    for (int j = 0; j < c_.lp.num_vars(); ++j) {
      if (!c_.binary[j] || lp.lower(j) == lp.upper(j)) continue;
      const double frac = std::min(std::abs(z[j]), std::abs(1.0 - z[j]));
      if (frac > bin_score) {
        bin_var = j;
        bin_score = frac;
        if (cfg_.branching == BranchingRule::FirstFractional) break;
      }
    }
    int pair_idx = -1;
    if (bin_var < 0) {
      double best = -1.0;
      for (std::size_t k = 0; k < c_.pairs.size(); ++k) {
        const Pair& p = c_.pairs[k];
        const double a = std::abs(p.a.value(z));
        const double b = std::abs(p.b.value(z));
        if (std::min(a, b) <= cfg_.feas_tol) continue;
        if (a * b > best) {
          best = a * b;
          pair_idx = static_cast<int>(k);
          if (cfg_.branching == BranchingRule::FirstFractional) break;
        }
      }
    }

    if (bin_var < 0 && pair_idx < 0) {
      const double f = res.objective + c_.constant;
      std::vector<double> vals(z.begin(), z.begin() + c_.num_original);
      const auto rep = check_feasibility(problem_, vals, std::max(10.0 * cfg_.feas_tol, 1e-7));
      if (rep.ok && f < ub_) {
        ub_ = f;
        incumbent_ = std::move(vals);
        log_line(lb);
      }
      if (res.status != kernel::ConvexStatus::Optimal || !rep.ok) lb_floor_ = std::min(lb_floor_, lb);
      return out;
    }

    std::optional<Node> near;
    std::optional<Node> far;
    if (bin_var >= 0) {
      const bool up = z[bin_var] >= 0.5;
      near = child(node, lb, bin_var, up ? 1.0 : 0.0);
      far = child(node, lb, bin_var, up ? 0.0 : 1.0);
    } else {
      const Pair& p = c_.pairs[pair_idx];
      const bool a_first = std::abs(p.a.value(z)) <= std::abs(p.b.value(z));
      const Member& m1 = a_first ? p.a : p.b;
      const Member& m2 = a_first ? p.b : p.a;
      near = child(node, lb, m1.var, m1.zero_at);
      far = child(node, lb, m2.var, m2.zero_at);
    }
    out.first = std::move(near);
    out.second = std::move(far);
    return out;
  }

  void log_line(double bound) {
    if (cfg_.log == nullptr) return;
    const double t = seconds_since(start_);
    const double lb = std::min(bound, ub_);
    *cfg_.log << "node=" << nodes_ << " bound=" << c_.sign * lb
              << " incumbent=" << (std::isfinite(ub_) ? c_.sign * ub_ : kInf)
              << " gap=" << rel_gap(ub_, lb) << " time=" << t << "\n";
    last_log_ = t;
  }

  void maybe_log(double bound) {
    if (cfg_.log != nullptr && seconds_since(start_) - last_log_ >= cfg_.log_interval) log_line(bound);
  }

  Solution finish(Solution sol, bool stopped) {
    sol.nodes = nodes_;
    const bool have = std::isfinite(ub_);
    double lb = std::min({pruned_min_, lb_floor_, ub_});
    if (have) {
      sol.values = incumbent_;
      sol.objective = c_.sign * ub_;
      sol.bound = c_.sign * lb;
      sol.gap = rel_gap(ub_, lb);
      sol.status = stopped ? SolveStatus::TimeLimit : SolveStatus::Optimal;
    } else {
      sol.objective = std::numeric_limits<double>::quiet_NaN();
      sol.bound = stopped ? c_.sign * lb_floor_ : std::numeric_limits<double>::quiet_NaN();
      sol.gap = kInf;
      sol.status = stopped ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
    }
    sol.wall_time = seconds_since(start_);
    if (cfg_.log != nullptr) {
      *cfg_.log << "node=" << nodes_ << " bound=" << sol.bound << " incumbent=" << sol.objective
                << " gap=" << sol.gap << " time=" << sol.wall_time << "\n";
    }
    return sol;
  }

  const SingleLevelProblem& problem_;
  BnbConfig cfg_;
  Clock::time_point start_;
  Compiled c_;
  Vector root_lo_, root_hi_;
  kernel::KelleyModel* model_ = nullptr;
  std::vector<BoundChange> applied_;
  long next_id_ = 0;
  long nodes_ = 0;
  double ub_ = kInf;
  double pruned_min_ = kInf;
  double lb_floor_ = kInf;
  std::vector<double> incumbent_;
  double last_log_ = 0.0;
};

}  // namespace

Solution solve(const SingleLevelProblem& problem, const BnbConfig& config) {
  if (!(config.gap_tol > 0.0) || !(config.feas_tol > 0.0) || !(config.time_limit > 0.0)) {
    throw std::invalid_argument("BnbConfig tolerances and time limit must be positive");
  }
  BranchAndBound bnb(problem, config);
  return bnb.run();
}

}  // namespace slmf::solver
