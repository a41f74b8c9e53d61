#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace slmf::testing {

namespace {

double lhs(const kernel::LpRow& r, const Vector& x) {
  double v = 0.0;
  for (const auto& t : r.terms) v += t.coef * x[t.var];
  return v;
}

}  // namespace

LpCertificate certify(const kernel::LpProblem& p, const kernel::LpResult& r) {
  LpCertificate c;
  const int n = p.num_vars();
  const int m = static_cast<int>(p.rows.size());
  for (int j = 0; j < n; ++j) {
    c.primal_violation = std::max({c.primal_violation, p.lower[j] - r.primal[j],
                                   r.primal[j] - p.upper[j]});
  }
  for (int i = 0; i < m; ++i) {
    const auto& row = p.rows[i];
    const double a = lhs(row, r.primal);
    const double pi = r.duals[i];
    switch (row.rel) {
      case Relation::LessEqual:
        c.primal_violation = std::max(c.primal_violation, a - row.rhs);
        c.dual_violation = std::max(c.dual_violation, pi);
        break;
      case Relation::GreaterEqual:
        c.primal_violation = std::max(c.primal_violation, row.rhs - a);
        c.dual_violation = std::max(c.dual_violation, -pi);
        break;
      case Relation::Equal:
        c.primal_violation = std::max(c.primal_violation, std::abs(a - row.rhs));
        break;
    }
    c.slackness = std::max(c.slackness, std::abs(pi * (a - row.rhs)));
  }
  Vector d = p.objective;
  for (int i = 0; i < m; ++i) {
    for (const auto& t : p.rows[i].terms) d[t.var] -= r.duals[i] * t.coef;
  }
  double cx = 0.0, dual = 0.0;
  for (int i = 0; i < m; ++i) dual += r.duals[i] * p.rows[i].rhs;
  for (int j = 0; j < n; ++j) {
    cx += p.objective[j] * r.primal[j];
    dual += d[j] * r.primal[j];
    // d_j > 0 needs x_j at its lower bound, d_j < 0 at its upper bound.
    const double scale = std::max(1.0, std::abs(r.primal[j]));
    if (d[j] > 0.0) {
      if (!std::isfinite(p.lower[j])) c.dual_violation = std::max(c.dual_violation, d[j]);
      else c.slackness = std::max(c.slackness, d[j] * (r.primal[j] - p.lower[j]) / scale);
    } else if (d[j] < 0.0) {
      if (!std::isfinite(p.upper[j])) c.dual_violation = std::max(c.dual_violation, -d[j]);
      else c.slackness = std::max(c.slackness, -d[j] * (p.upper[j] - r.primal[j]) / scale);
    }
  }
  c.duality_gap = std::abs(cx - dual) / (1.0 + std::abs(cx));
  return c;
}

kernel::LpProblem random_bounded_lp(std::mt19937_64& gen, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.5, 5.0);
  kernel::LpProblem p;
  Vector x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = 2.0 * u(gen);
    const double hi = lo + width(gen);
    p.add_var(u(gen), lo, hi);
    x0[j] = lo + (hi - lo) * (0.5 + 0.4 * u(gen));
  }
  for (int i = 0; i < m; ++i) {
    kernel::LpRow r;
    double a0 = 0.0;
    for (int j = 0; j < n; ++j) {
      if (u(gen) < -0.4) continue;  // about 30% zeros
      const double a = u(gen);
      r.terms.push_back({j, a});
      a0 += a * x0[j];
    }
    const int kind = static_cast<int>((u(gen) + 1.0) * 1.5);
    r.rel = kind == 0 ? Relation::LessEqual : kind == 1 ? Relation::GreaterEqual : Relation::Equal;
    const double s = 0.5 * (u(gen) + 1.0);
    r.rhs = kind == 0 ? a0 + s : kind == 1 ? a0 - s : a0;
    p.rows.push_back(std::move(r));
  }
  return p;
}

DiagonalInstance random_diagonal(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  DiagonalInstance d;
  for (int j = 0; j < n; ++j) {
    const double c = u(gen);
    const double lo = -1.0 + 0.5 * u(gen);
    const double hi = lo + 0.2 + std::abs(u(gen));
    const double wj = w(gen);
    d.lp.add_var(c, lo, hi);
    d.terms.push_back({wj, {{j, 1.0}}});
    const double z = std::clamp(-c / (2.0 * wj), lo, hi);
    d.oracle += wj * z * z + c * z;
  }
  return d;
}

GameSpec random_game(std::uint64_t seed, const RandomGameOptions& opt) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * 0.5 * (u(gen) + 1.0); };
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(std::floor(between(0.0, hi - lo + 1 - 1e-9)));
  };
  GameSpec g;
  g.mode = opt.mode;
  const int p = opt.leader_dim;
  g.leader.A = Matrix(0, p);
  g.leader.lower.assign(p, 0.0);
  g.leader.upper.assign(p, 1.0);
  g.leader.binary.assign(p, true);
  g.objective.sense = u(gen) < 0.0 ? Sense::Minimize : Sense::Maximize;
  for (int j = 0; j < p; ++j) g.objective.cx.push_back(u(gen));

  const int dims[2] = {pick(1, opt.max_follower_dim), pick(1, opt.max_follower_dim)};
  const int q = dims[0] + dims[1];
  for (int i = 0; i < 2; ++i) {
    const int d = dims[i];
    FollowerData f;
    f.dim = d;
    f.sense = u(gen) < 0.0 ? Sense::Minimize : Sense::Maximize;
    const double sg = sense_sign(f.sense);
    const int m = d + 1;
    f.B = Matrix(m, p);
    f.C = Matrix(m, d);
    f.D = Matrix(m, q - d);
    f.gamma.assign(m, 0.0);
    for (int k = 0; k < d; ++k) f.C(k, k) = -1.0;
    for (int k = 0; k < d; ++k) f.C(d, k) = between(0.5, 1.5);
    for (int j = 0; j < p; ++j) f.B(d, j) = 0.4 * u(gen);
    if (!opt.strictly_convex) {
      for (int l = 0; l < q - d; ++l) f.D(d, l) = 0.3 * u(gen);
    }
    f.gamma[d] = between(1.0, 2.0);
    f.alpha0.resize(d);
    f.alpha_x = Matrix(d, p);
    f.alpha_y = Matrix(d, q - d);
    f.beta.resize(d);
    for (int k = 0; k < d; ++k) {
      f.alpha0[k] = sg * 1.5 * u(gen);
      for (int j = 0; j < p; ++j) f.alpha_x(k, j) = sg * u(gen);
      for (int l = 0; l < q - d; ++l) f.alpha_y(k, l) = sg * 0.25 * u(gen);
      f.beta[k] = opt.strictly_convex ? sg * between(1.0, 2.0) : 0.0;
    }
    g.followers.push_back(std::move(f));
  }
  for (int k = 0; k < q; ++k) g.objective.cy.push_back(2.0 * u(gen));
  if (opt.leader_quad && u(gen) < 0.0) {
    QuadTerm t;
    t.weight = between(0.1, 1.0);
    for (int k = 0; k < p + q; ++k) t.direction.push_back(u(gen));
    g.objective.quad.push_back(std::move(t));
  }
  // One or two disjoint cardinality sets over a shuffled coordinate list.
  std::vector<CoordRef> coords;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < dims[i]; ++k) coords.push_back({i, k});
  }
  std::shuffle(coords.begin(), coords.end(), gen);
  const int sets = q >= 4 && u(gen) < 0.0 ? 2 : 1;
  const int first = sets == 2 ? q / 2 : std::max(1, pick(q - 1, q));
  int start = 0;
  for (int s = 0; s < sets; ++s) {
    const int len = s == 0 ? first : q - first;
    CardinalityConstraint c;
    c.indices.assign(coords.begin() + start, coords.begin() + start + len);
    c.bound = len >= 2 ? pick(1, len - 1) : pick(0, 1);
    g.cardinality.push_back(std::move(c));
    start += len;
  }
  return g;
}

OracleResult equilibrium_oracle(const GameSpec& spec) {
  const int p = spec.leader_dim();
  const int q = spec.follower_total();
  const bool mixed = spec.mode == CardinalityMode::Mixed;
  OracleResult best;
  const double sg = sense_sign(spec.objective.sense);
  for (long xm = 0; xm < (1L << p); ++xm) {
    Vector x(p);
    for (int j = 0; j < p; ++j) x[j] = static_cast<double>((xm >> j) & 1);
    const long umax = mixed ? (1L << q) : 1L;
    for (long um = 0; um < umax; ++um) {
      Vector u;
      if (mixed) {
        u.resize(q);
        for (int k = 0; k < q; ++k) u[k] = static_cast<double>((um >> k) & 1);
        bool ok = true;
        for (const auto& c : spec.cardinality) {
          double sum = 0.0;
          for (const auto& r : c.indices) sum += u[spec.flat_index(r)];
          if (sum < static_cast<double>(c.indices.size()) - c.bound) ok = false;
        }
        if (!ok) continue;
      }
      const gnep::EquilibriumResult eq = gnep::find_equilibrium(spec, x, u);
      ++best.equilibria;
      if (!eq.found) {
        best.all_found = false;
        continue;
      }
      if (!mixed) {
        bool ok = true;
        for (const auto& c : spec.cardinality) {
          int nz = 0;
          for (const auto& r : c.indices) nz += std::abs(eq.y[spec.flat_index(r)]) > kNonzeroTol;
          if (nz > c.bound) ok = false;
        }
        if (!ok) continue;
      }
      const double v = leader_objective(spec, x, eq.y);
      if (!best.feasible || sg * v < sg * best.value) {
        best.feasible = true;
        best.value = v;
        best.x = x;
        best.y = eq.y;
        best.u = u;
      }
    }
  }
  return best;
}

int l0(const Vector& z) {
  int n = 0;
  for (double v : z) n += v != 0.0;
  return n;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace slmf::testing
