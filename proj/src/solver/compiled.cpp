#include "compiled.hpp"

#include <cmath>
#include <stdexcept>

namespace slmf::solver::detail {

namespace {

constexpr double kFixEps = 1e-12;

bool is_fixed_at(double lo, double hi, double v) {
  return std::abs(lo - v) <= kFixEps && std::abs(hi - v) <= kFixEps;
}

bool excludes(double lo, double hi, double v) { return lo > v + kFixEps || hi < v - kFixEps; }

bool fix(Vector& lo, Vector& hi, int var, double v) {
  if (excludes(lo[var], hi[var], v)) return false;
  lo[var] = hi[var] = v;
  return true;
}

}  // namespace

double Compiled::internal_objective(const Vector& z) const {
  double v = constant;
  for (int j = 0; j < lp.num_vars(); ++j) v += lp.objective[j] * z[j];
  for (const auto& t : quad) {
    double r = 0.0;
    for (const auto& e : t.direction) r += e.coef * z[e.var];
    v += t.weight * r * r;
  }
  return v;
}

Compiled compile(const SingleLevelProblem& problem) {
  if (!problem.bilinear.empty()) {
    throw std::invalid_argument("problem carries bilinear terms; use the enumeration oracle");
  }
  if (problem.equilibrium) {
    throw std::invalid_argument(
        "problem keeps the equilibrium constraint abstract; expand it with the KKT builder");
  }
  Compiled c;
  c.num_original = problem.num_vars();
  c.sign = sense_sign(problem.objective.sense);
  c.constant = c.sign * problem.objective.constant;
  for (const auto& v : problem.vars) {
    double lo = v.lower;
    double hi = v.upper;
    if (v.binary) {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, 1.0);
      lo = std::ceil(lo - 1e-9);
      hi = std::floor(hi + 1e-9);
    }
    if (lo > hi) c.infeasible = true;
    c.lp.add_var(0.0, lo, std::max(lo, hi));
    c.binary.push_back(v.binary);
  }
  for (const auto& t : problem.objective.linear) c.lp.objective[t.var] += c.sign * t.coef;
  for (const auto& q : problem.objective.quad) {
    if (q.weight < 0.0) throw std::invalid_argument("negative quadratic weight");
    if (q.weight > 0.0 && !q.terms.empty()) c.quad.push_back({q.weight, q.terms});
  }
  for (const auto& r : problem.rows) c.lp.rows.push_back({r.terms, r.rel, r.rhs});

  std::vector<std::pair<int, double>> forced;  // var must equal value
  auto member = [&](const AffineExpr& e, Member& m) -> int {
    // 0: ordinary member, 1: identically zero, 2: never zero
    if (e.terms.empty()) return std::abs(e.constant) <= 1e-12 ? 1 : 2;
    if (e.terms.size() == 1 && e.terms[0].coef != 0.0) {
      m.var = e.terms[0].var;
      m.coef = e.terms[0].coef;
      m.zero_at = -e.constant / m.coef;
      if (c.binary[m.var] && std::abs(m.zero_at) > 1e-12 && std::abs(m.zero_at - 1.0) > 1e-12) {
        return 2;
      }
      if (c.binary[m.var]) m.zero_at = std::round(m.zero_at);
      return 0;
    }
    const int w = c.lp.add_var(0.0, -kInf, kInf);
    c.binary.push_back(false);
    kernel::LpRow row;
    row.terms = e.terms;
    row.terms.push_back({w, -1.0});
    row.rel = Relation::Equal;
    row.rhs = -e.constant;
    c.lp.rows.push_back(std::move(row));
    m = {w, 0.0, 1.0};
    return 0;
  };
  for (const auto& p : problem.pairs) {
    Pair cp;
    const int ka = member(p.a, cp.a);
    const int kb = member(p.b, cp.b);
    if (ka == 1 || kb == 1) continue;
    if (ka == 2 && kb == 2) {
      c.infeasible = true;
      continue;
    }
    if (ka == 2) {
      forced.push_back({cp.b.var, cp.b.zero_at});
      continue;
    }
    if (kb == 2) {
      forced.push_back({cp.a.var, cp.a.zero_at});
      continue;
    }
    auto unbounded = [&](int v) {
      return !std::isfinite(c.lp.lower[v]) && !std::isfinite(c.lp.upper[v]);
    };
    if (unbounded(cp.a.var) && unbounded(cp.b.var)) {
      throw std::invalid_argument("pair " + p.name + " has two members without any finite bound");
    }
    cp.has_binary = c.binary[cp.a.var] || c.binary[cp.b.var];
    c.pairs.push_back(cp);
  }
  for (const auto& [v, val] : forced) {
    if (!fix(c.lp.lower, c.lp.upper, v, val)) c.infeasible = true;
  }
  if (!c.infeasible && !propagate(c, c.lp.lower, c.lp.upper)) c.infeasible = true;
  return c;
}

bool propagate(const Compiled& c, Vector& lo, Vector& hi) {
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : c.pairs) {
      const Member* ms[2] = {&p.a, &p.b};
      for (int side = 0; side < 2; ++side) {
        const Member& m = *ms[side];
        const Member& other = *ms[1 - side];
        if (!excludes(lo[m.var], hi[m.var], m.zero_at)) continue;
        if (is_fixed_at(lo[other.var], hi[other.var], other.zero_at)) continue;
        if (!fix(lo, hi, other.var, other.zero_at)) return false;
        changed = true;
      }
    }
  }
  return true;
}

bool settled(const Pair& p, const Vector& lo, const Vector& hi) {
  return is_fixed_at(lo[p.a.var], hi[p.a.var], p.a.zero_at) ||
         is_fixed_at(lo[p.b.var], hi[p.b.var], p.b.zero_at);
}

std::vector<BoundChange> diff(const Vector& root_lo, const Vector& root_hi, const Vector& lo,
                              const Vector& hi) {
  std::vector<BoundChange> out;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (lo[j] != root_lo[j] || hi[j] != root_hi[j]) {
      out.push_back({static_cast<int>(j), lo[j], hi[j]});
    }
  }
  return out;
}

Solution make_solution(const SingleLevelProblem& problem, const Compiled&) {
  Solution s;
  s.names.reserve(problem.vars.size());
  for (const auto& v : problem.vars) s.names.push_back(v.name);
  return s;
}

}  // namespace slmf::solver::detail
