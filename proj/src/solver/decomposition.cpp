#include <chrono>
#include <cmath>
#include <stdexcept>

#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"

namespace slmf::solver {

PuResult solve_pu_decomposition(const GameSpec& spec, const BnbConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  if (spec.mode != CardinalityMode::Mixed) {
    throw std::invalid_argument("the interdiction decomposition needs the mixed mode");
  }
  const int q = spec.follower_total();
  if (q > config.pu_cap) {
    throw std::length_error("decomposition over " + std::to_string(q) +
                            " coordinates exceeds the cap of " + std::to_string(config.pu_cap));
  }
  const SingleLevelProblem base = build_mixed_final(spec);

  std::vector<std::vector<int>> patterns;
  for (long mask = 0; mask < (1L << q); ++mask) {
    std::vector<double> u(q);
    for (int k = 0; k < q; ++k) u[k] = static_cast<double>((mask >> k) & 1);
    if (!admissible_u(spec, u)) continue;
    patterns.emplace_back(u.begin(), u.end());
  }

  BnbConfig sub_cfg = config;
  sub_cfg.log = nullptr;
  PuResult out;
  out.table.resize(patterns.size());
  std::vector<Solution> sols(patterns.size());
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < static_cast<long>(patterns.size()); ++t) {
    SingleLevelProblem sub = base;
    sub.provenance = Provenance::PuSub;
    for (int k = 0; k < q; ++k) {
      auto& v = sub.vars[sub.game.u[k]];
      v.lower = v.upper = patterns[t][k];
    }
    sols[t] = solve(sub, sub_cfg);
    out.table[t] = {patterns[t], sols[t].status, sols[t].objective, sols[t].gap};
  }

  const double sign = sense_sign(spec.objective.sense);
  Solution best;
  for (const auto& v : base.vars) best.names.push_back(v.name);
  best.objective = best.bound = std::numeric_limits<double>::quiet_NaN();
  bool timed_out = false;
  double bound = kInf;  // internal, over patterns
  long nodes = 0;
  for (std::size_t t = 0; t < sols.size(); ++t) {
    const Solution& s = sols[t];
    nodes += s.nodes;
    if (s.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      out.solution = best;
      return out;
    }
    if (s.status == SolveStatus::TimeLimit) {
      timed_out = true;
      if (std::isfinite(s.bound)) bound = std::min(bound, sign * s.bound);
      else bound = -kInf;
    }
    if (!s.has_point()) continue;
    if (s.status == SolveStatus::Optimal) bound = std::min(bound, sign * s.bound);
    if (!best.has_point() || sign * s.objective < sign * best.objective) {
      best.values = s.values;
      best.objective = s.objective;
    }
  }
  best.nodes = nodes;
  best.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  if (best.has_point()) {
    const double ub = sign * best.objective;
    const double lb = std::min(bound, ub);
    best.bound = sign * lb;
    best.gap = std::isfinite(lb) ? std::abs(ub - lb) / std::max(1.0, std::abs(ub)) : kInf;
    best.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  } else {
    best.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
  }
  out.solution = std::move(best);
  return out;
}

}  // namespace slmf::solver
