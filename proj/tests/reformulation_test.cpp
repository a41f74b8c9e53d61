#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"
#include "support/games.hpp"
#include "support/oracles.hpp"

namespace slmf {
namespace {

// Value vector from a name map; unnamed variables are zero.
Vector point(const SingleLevelProblem& p, const std::map<std::string, double>& named) {
  Vector v(p.num_vars(), 0.0);
  for (const auto& [name, val] : named) {
    const int k = p.find(name);
    REQUIRE_MESSAGE(k >= 0, name);
    v[k] = val;
  }
  return v;
}

const Row& row_named(const SingleLevelProblem& p, const std::string& name) {
  for (const auto& r : p.rows) {
    if (r.name == name) return r;
  }
  FAIL("no row " << name);
  throw 0;
}

double coef(const SingleLevelProblem& p, const Row& r, const std::string& var) {
  const int k = p.find(var);
  for (const auto& t : r.terms) {
    if (t.var == k) return t.coef;
  }
  return 0.0;
}

bool feasible(const SingleLevelProblem& p, const Vector& v) {
  return check_feasibility(p, v, 1e-9).ok;
}

// Decides feasibility of the fragment with z fixed by the global solver.
bool fragment_feasible(int n, int K, const Vector& z) {
  SingleLevelProblem p = card_to_complementarity(n, K);
  for (int j = 0; j < n; ++j) p.vars[p.game.y[j]].lower = p.vars[p.game.y[j]].upper = z[j];
  return solver::solve(p).status == SolveStatus::Optimal;
}

TEST_CASE("cardinality fragment examples") {
  SUBCASE("n=3 K=1") {
    const SingleLevelProblem p = card_to_complementarity(3, 1);
    CHECK(p.rows.size() == 1);
    CHECK(p.rows[0].rhs == 2.0);
    CHECK(p.pairs.size() == 3);
    CHECK(feasible(p, point(p, {{"z[1]", 3.0}, {"u[0]", 1.0}, {"u[2]", 1.0}})));
  }
  SUBCASE("n=3 K=3 is vacuous") {
    const SingleLevelProblem p = card_to_complementarity(3, 3);
    CHECK(p.rows[0].rhs == 0.0);
    CHECK(feasible(p, point(p, {{"z[0]", 1.0}, {"z[1]", -2.0}, {"z[2]", 5.0}})));
  }
  SUBCASE("n=2 K=0 forces z=0") {
    CHECK(fragment_feasible(2, 0, {0.0, 0.0}));
    CHECK_FALSE(fragment_feasible(2, 0, {0.0, 1e-3}));
  }
  SUBCASE("bad bounds") {
    CHECK_THROWS_AS(card_to_complementarity(2, 3), std::invalid_argument);
    CHECK_THROWS_AS(card_to_complementarity(2, -1), std::invalid_argument);
  }
}

TEST_CASE("cardinality fragment is exact over all supports for n <= 5") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> mag(0.01, 10.0);
  for (int n = 1; n <= 5; ++n) {
    for (int K = 0; K <= n; ++K) {
      for (int mask = 0; mask < (1 << n); ++mask) {
        Vector z(n, 0.0);
        for (int j = 0; j < n; ++j) {
          if ((mask >> j) & 1) z[j] = (gen() & 1 ? 1.0 : -1.0) * mag(gen);
        }
        CHECK(fragment_feasible(n, K, z) == (testing::l0(z) <= K));
      }
    }
  }
}

TEST_CASE("CardRef keeps the equilibrium abstract") {
  const GameSpec g = testing::local_min_example();
  const SingleLevelProblem p = build_card_ref(g);
  CHECK(p.provenance == Provenance::CardRef);
  REQUIRE(p.equilibrium.has_value());
  CHECK(p.equilibrium->y_vars.size() == 2);
  CHECK(p.pairs.size() == 2);
  CHECK_THROWS_AS(solver::solve(p), std::invalid_argument);
  // (x, (0,0), (1,1)) and the local optimum (x, (0,0), (0,1)).
  CHECK(feasible(p, point(p, {{"x[0]", 0.5}, {"u[0][0]", 1.0}, {"u[1][0]", 1.0}})));
  CHECK(feasible(p, point(p, {{"x[0]", 0.5}, {"u[1][0]", 1.0}})));
  CHECK_FALSE(feasible(p, point(p, {{"x[0]", 0.5}, {"y[0][0]", 0.5}, {"y[1][0]", 1.0},
                                    {"u[1][0]", 1.0}})));
}

TEST_CASE("CardRef with a vacuous bound accepts u = 0") {
  GameSpec g = testing::local_min_example();
  g.cardinality[0].bound = 2;
  const SingleLevelProblem p = build_card_ref(g);
  CHECK(feasible(p, point(p, {{"y[0][0]", 0.7}, {"y[1][0]", 0.2}})));
}

TEST_CASE("upper MPCC stationarity of the infeasible example") {
  const SingleLevelProblem p = build_upper_mpcc(testing::infeasible_example());
  const Row& r = row_named(p, "stat[0][0]");
  CHECK(r.rel == Relation::Equal);
  CHECK(r.rhs == -1.0);  // 1 - 2 l0 + l1 - l2 = 0
  CHECK(coef(p, r, "lambda[0][0]") == -2.0);
  CHECK(coef(p, r, "lambda[0][1]") == 1.0);
  CHECK(coef(p, r, "lambda[0][2]") == -1.0);
  CHECK(r.terms.size() == 3);
  // Follower 2 maximizes y2: -1 + l0 + l1 - l2 = 0.
  const Row& r2 = row_named(p, "stat[1][0]");
  CHECK(r2.rhs == 1.0);
  CHECK(coef(p, r2, "lambda[1][0]") == 1.0);
  CHECK(p.pairs.size() == 2 + 6);
}

TEST_CASE("unconstrained linear follower: stationarity pins alpha") {
  GameSpec g = testing::local_min_example();
  auto& f = g.followers[0];
  f.B = Matrix(0, 1);
  f.C = Matrix(0, 1);
  f.D = Matrix(0, 1);
  f.gamma.clear();
  f.alpha0 = {0.5};
  f.alpha_x = Matrix(1, 1);
  f.alpha_x(0, 0) = 2.0;
  const SingleLevelProblem p = build_upper_mpcc(g);
  const Row& r = row_named(p, "stat[0][0]");
  CHECK(r.rhs == -0.5);
  CHECK(coef(p, r, "x[0]") == 2.0);
  CHECK(r.terms.size() == 1);
}

TEST_CASE("mixed MPCC with u = 0 reduces to the upper stationarity") {
  GameSpec g = testing::random_game(4, {});
  const SingleLevelProblem up = build_upper_mpcc(g);
  g.mode = CardinalityMode::Mixed;
  const SingleLevelProblem mx = build_mixed_mpcc(g);
  CHECK(mx.bilinear.size() == static_cast<std::size_t>(g.follower_total()));
  for (const auto& r : up.rows) {
    if (r.name.rfind("stat", 0) != 0) continue;
    const Row& m = row_named(mx, r.name);
    CHECK(m.rhs == r.rhs);
    CHECK(m.terms.size() == r.terms.size());
    for (const auto& t : r.terms) CHECK(coef(mx, m, up.vars[t.var].name) == t.coef);
  }
}

TEST_CASE("mixed final pair families") {
  GameSpec g = testing::local_min_example();
  g.mode = CardinalityMode::Mixed;
  const SingleLevelProblem p = build_mixed_final(g);
  for (int v : p.game.u) CHECK(p.vars[v].binary);
  int uy = 0, eu = 0, cs = 0;
  for (const auto& pr : p.pairs) {
    uy += pr.name.rfind("uy", 0) == 0;
    eu += pr.name.rfind("eu", 0) == 0;
    cs += pr.name.rfind("cs", 0) == 0;
  }
  CHECK(uy == 2);
  CHECK(eu == 2);
  CHECK(cs == 4);
  // u = 1 forces y = 0 and frees eta; u = 0 forces eta = 0. Zero follower
  // objectives give stationarity l0 - l1 + eta = 0.
  const auto base = std::map<std::string, double>{
      {"u[0][0]", 1.0}, {"s[0][0]", 1.0}, {"lambda[0][1]", 0.5}, {"eta[0][0]", 0.5},
      {"y[1][0]", 1.0}, {"s[1][1]", 1.0}};
  CHECK(feasible(p, point(p, base)));
  auto bad = base;
  bad["y[0][0]"] = 0.5;
  bad["s[0][0]"] = 0.5;
  CHECK_FALSE(feasible(p, point(p, bad)));
  bad = base;
  bad["u[0][0]"] = 0.0;
  bad["u[1][0]"] = 1.0;  // keep the interdiction row, u[1][0] * y[1][0] != 0 now
  CHECK_FALSE(feasible(p, point(p, bad)));
}

TEST_CASE("builders reject the wrong mode") {
  GameSpec g = testing::local_min_example();
  CHECK_THROWS_AS(build_mixed_final(g), std::invalid_argument);
  CHECK_THROWS_AS(build_mixed_mpcc(g), std::invalid_argument);
  g.mode = CardinalityMode::Mixed;
  CHECK_THROWS_AS(build_upper_mpcc(g), std::invalid_argument);
  CHECK_THROWS_AS(build_card_ref(g), std::invalid_argument);
  g.cardinality[0].bound = 7;
  CHECK_THROWS_AS(build_mixed_final(g), std::invalid_argument);
}

TEST_CASE("normalize_u examples") {
  CHECK(normalize_u(Vector{0.3, 0.0, 1.0}) == std::vector<int>{1, 0, 1});
  CHECK(normalize_u(Vector{0.0, 0.0}) == std::vector<int>{0, 0});
  CHECK(normalize_u(Vector{1e-10}) == std::vector<int>{0});
  CHECK_THROWS_AS(normalize_u(Vector{1.5}), std::invalid_argument);
  CHECK_THROWS_AS(normalize_u(Vector{-0.1}), std::invalid_argument);
}

// Feasible CardRef points with fractional u stay feasible after rounding.
TEST_CASE("normalize_u preserves CardRef feasibility") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const GameSpec g = testing::random_game(seed, {});
    const auto eq = testing::equilibrium_oracle(g);
    if (!eq.feasible) continue;
    const SingleLevelProblem p = build_card_ref(g);
    Vector v(p.num_vars(), 0.0);
    for (int j = 0; j < g.leader_dim(); ++j) v[p.game.x[j]] = eq.x[j];
    for (int k = 0; k < g.follower_total(); ++k) {
      // Exact zeros keep the pairs exact.
      const double y = std::abs(eq.y[k]) <= testing::kNonzeroTol ? 0.0 : eq.y[k];
      v[p.game.y[k]] = y;
      if (p.game.u[k] >= 0 && y == 0.0) v[p.game.u[k]] = 1.0;
    }
    REQUIRE(feasible(p, v));
    // Shrink u where the cardinality rows have room.
    for (std::size_t l = 0; l < g.cardinality.size(); ++l) {
      const auto& c = g.cardinality[l];
      double room = 0.0;
      for (const auto& r : c.indices) room += v[p.game.u[g.flat_index(r)]];
      room -= static_cast<double>(c.indices.size()) - c.bound;
      for (const auto& r : c.indices) {
        double& u = v[p.game.u[g.flat_index(r)]];
        const double cut = std::min({u, room, u * frac(gen)});
        u -= cut;
        room -= cut;
      }
    }
    REQUIRE(feasible(p, v));
    Vector uvals;
    for (int k : p.game.u) uvals.push_back(k >= 0 ? v[k] : 0.0);
    const auto ub = normalize_u(uvals);
    for (std::size_t k = 0; k < ub.size(); ++k) {
      if (p.game.u[k] >= 0) v[p.game.u[k]] = ub[k];
    }
    CHECK(feasible(p, v));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("multiplier maps between the mixed forms") {
  const Vector nu{2.0, -1.0, 4.0}, u{1.0, 0.0, 0.5};
  CHECK(eta_from_nu(nu, u) == Vector{2.0, 0.0, 2.0});
  CHECK(nu_from_eta(Vector{2.0, 0.0, 2.0}, u) == Vector{2.0, 0.0, 4.0});
}

// A feasible final point maps to a feasible continuous-u point with
// nu = eta, and back with eta = nu .* u.
TEST_CASE("mixed final and mixed MPCC points correspond") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    GameSpec g = testing::random_game(seed, {.mode = CardinalityMode::Mixed});
    const SingleLevelProblem fin = build_mixed_final(g);
    const SingleLevelProblem mpcc = build_mixed_mpcc(g);
    const Solution s = solver::solve(fin);
    REQUIRE(s.status == SolveStatus::Optimal);
    Vector v(mpcc.num_vars(), 0.0);
    for (int k = 0; k < mpcc.num_vars(); ++k) {
      std::string name = mpcc.vars[k].name;
      if (name.rfind("nu", 0) == 0) name = "eta" + name.substr(2);
      v[k] = s.values[fin.find(name)];
    }
    CHECK(check_feasibility(mpcc, v, 1e-7).ok);
    CHECK(objective_value(mpcc, v) == doctest::Approx(s.objective).epsilon(1e-9));
    Vector back(fin.num_vars(), 0.0);
    for (int k = 0; k < fin.num_vars(); ++k) {
      const std::string& name = fin.vars[k].name;
      if (name.rfind("eta", 0) == 0) {
        const std::string idx = name.substr(3);
        back[k] = v[mpcc.find("nu" + idx)] * v[mpcc.find("u" + idx)];
      } else {
        back[k] = v[mpcc.find(name)];
      }
    }
    CHECK(check_feasibility(fin, back, 1e-7).ok);
    ++checked;
  }
  CHECK(checked == 12);
}

TEST_CASE("extract_point and LP text") {
  const SingleLevelProblem p = build_upper_mpcc(testing::local_min_example(), {.binary_u = true});
  Vector v(p.num_vars(), 0.0);
  v[p.game.x[0]] = 0.25;
  v[p.game.y[1]] = 1.0;
  v[p.game.u[0]] = 1.0;
  const GamePoint pt = extract_point(p, v);
  CHECK(pt.x == Vector{0.25});
  CHECK(pt.y == Vector{0.0, 1.0});
  CHECK(pt.u == Vector{1.0, 0.0});
  std::ostringstream os;
  write_lp_text(os, p);
  CHECK(os.str().find("PAIR") != std::string::npos);
  CHECK(os.str().find("BIN") != std::string::npos);
}

}  // namespace
}  // namespace slmf
