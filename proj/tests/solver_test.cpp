#include <cmath>
#include <map>
#include <stdexcept>

#include "doctest.h"
#include "slmf/facility.hpp"
#include "slmf/gnep.hpp"
#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"
#include "support/games.hpp"
#include "support/oracles.hpp"

namespace slmf::solver {
namespace {

using testing::close;
using testing::equilibrium_oracle;
using testing::random_game;
using testing::RandomGameOptions;

constexpr double kValueTol = 1e-6;

BnbConfig tight() {
  BnbConfig c;
  c.gap_tol = 1e-9;
  return c;
}

TEST_CASE("infeasible cardinality example has no solution") {
  const GameSpec g = testing::infeasible_example();
  for (bool binary : {false, true}) {
    const SingleLevelProblem p = build_upper_mpcc(g, {.binary_u = binary});
    const Solution s = solve(p, tight());
    CHECK(s.status == SolveStatus::Infeasible);
    CHECK_FALSE(s.has_point());
    CHECK(std::isnan(s.objective));
    CHECK(enumerate(p).status == SolveStatus::Infeasible);
  }
}

TEST_CASE("global solve escapes the local minimum") {
  const GameSpec g = testing::local_min_example();
  const SingleLevelProblem p = build_upper_mpcc(g);
  for (const Solution& s : {solve(p, tight()), enumerate(p)}) {
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(s.value("y[0][0]") == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.value("y[1][0]") == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("enumeration without disjunctions is a single convex solve") {
  SingleLevelProblem p;
  const int a = p.add_var({"a", VarRole::Aux, 0.0, 2.0});
  const int b = p.add_var({"b", VarRole::Aux, 0.0, 2.0});
  p.rows.push_back({"r", {{a, 1.0}, {b, 1.0}}, Relation::GreaterEqual, 1.0});
  p.objective.linear = {{a, 1.0}, {b, 2.0}};
  const Solution s = enumerate(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.value("a") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(solve(p).objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unbounded relaxation is reported") {
  SingleLevelProblem p;
  const int a = p.add_var({"a", VarRole::Aux, 0.0, kInf});
  p.objective.linear = {{a, -1.0}};
  CHECK(solve(p).status == SolveStatus::Unbounded);
}

TEST_CASE("solver-ready checks") {
  const GameSpec g = testing::infeasible_example();
  CHECK_THROWS_AS(solve(build_card_ref(g)), std::invalid_argument);

  GameSpec mixed = g;
  mixed.mode = CardinalityMode::Mixed;
  CHECK_THROWS_AS(solve(build_mixed_mpcc(mixed)), std::invalid_argument);
  CHECK_THROWS_AS(solve_pu_decomposition(g), std::invalid_argument);

  SingleLevelProblem free_pair;
  const int a = free_pair.add_var({"a", VarRole::Aux, -kInf, kInf});
  const int b = free_pair.add_var({"b", VarRole::Aux, -kInf, kInf});
  free_pair.pairs.push_back({"p", AffineExpr::variable(a), AffineExpr::variable(b)});
  CHECK_THROWS_AS(solve(free_pair), std::invalid_argument);

  SingleLevelProblem many;
  for (int j = 0; j < 30; ++j) many.add_var({"z", VarRole::Aux, 0.0, 1.0, true});
  BnbConfig c;
  c.enumeration_cap = 22;
  CHECK_THROWS_AS(enumerate(many, c), std::length_error);

  GameSpec wide = testing::random_game(5, {.max_follower_dim = 3, .mode = CardinalityMode::Mixed});
  BnbConfig pc;
  pc.pu_cap = wide.follower_total() - 1;
  CHECK_THROWS_AS(solve_pu_decomposition(wide, pc), std::length_error);
}

TEST_CASE("upper solve matches the equilibrium oracle and enumeration") {
  int feasible = 0;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    CAPTURE(seed);
    const GameSpec g = random_game(seed, {});
    const testing::OracleResult o = equilibrium_oracle(g);
    REQUIRE(o.all_found);
    const SingleLevelProblem p = build_upper_mpcc(g);
    const Solution s = solve(p, tight());
    const Solution e = enumerate(p);
    CHECK(s.status == e.status);
    if (!o.feasible) {
      CHECK(s.status == SolveStatus::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(close(s.objective, o.value, kValueTol));
    CHECK(close(e.objective, o.value, kValueTol));
    CHECK(check_feasibility(p, s.values, 1e-6).ok);
  }
  CHECK(feasible > 0);
}

TEST_CASE("mixed final solve matches the oracle and the decomposition") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    CAPTURE(seed);
    const GameSpec g = random_game(seed, {.mode = CardinalityMode::Mixed});
    const testing::OracleResult o = equilibrium_oracle(g);
    REQUIRE(o.all_found);
    REQUIRE(o.feasible);  // u = 1 everywhere is admissible and y = 0 feasible
    const SingleLevelProblem p = build_mixed_final(g);
    const Solution s = solve(p, tight());
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(close(s.objective, o.value, kValueTol));
    const PuResult pu = solve_pu_decomposition(g, tight());
    REQUIRE(pu.solution.status == SolveStatus::Optimal);
    CHECK(close(pu.solution.objective, o.value, kValueTol));
  }
}

TEST_CASE("linear followers: branch-and-bound agrees with enumeration") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    const GameSpec g = random_game(seed, {.strictly_convex = false, .leader_quad = false});
    const SingleLevelProblem p = build_upper_mpcc(g, {.binary_u = seed % 2 == 0});
    const Solution s = solve(p, tight());
    const Solution e = enumerate(p);
    REQUIRE(s.status == e.status);
    if (s.status == SolveStatus::Optimal) {
      CHECK(close(s.objective, e.objective, kValueTol));
      CHECK(check_feasibility(p, s.values, 1e-6).ok);
    }
  }
}

TEST_CASE("node bounds never decrease along a path") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    CAPTURE(seed);
    const GameSpec g = random_game(seed, {.max_follower_dim = 3});
    std::vector<NodeRecord> trace;
    BnbConfig c = tight();
    c.trace = &trace;
    solve(build_upper_mpcc(g), c);
    REQUIRE_FALSE(trace.empty());
    std::map<long, NodeRecord> by_id;
    for (const NodeRecord& n : trace) by_id[n.id] = n;
    for (const NodeRecord& n : trace) {
      if (n.parent < 0) continue;
      const auto it = by_id.find(n.parent);
      REQUIRE(it != by_id.end());
      const NodeRecord& parent = it->second;
      CHECK(n.depth == parent.depth + 1);
      CHECK(n.bound >= parent.bound);
      if (std::isfinite(n.relaxation) && std::isfinite(parent.relaxation)) {
        CHECK(n.relaxation >= parent.relaxation - 1e-6 * std::max(1.0, std::abs(parent.relaxation)));
      }
    }
  }
}

TEST_CASE("deterministic runs repeat node for node") {
  const GameSpec g = random_game(21, {.max_follower_dim = 3});
  const SingleLevelProblem p = build_upper_mpcc(g);
  std::vector<NodeRecord> t1, t2;
  BnbConfig c = tight();
  c.trace = &t1;
  const Solution s1 = solve(p, c);
  c.trace = &t2;
  const Solution s2 = solve(p, c);
  CHECK(s1.status == s2.status);
  CHECK(s1.values == s2.values);
  CHECK(s1.nodes == s2.nodes);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t k = 0; k < t1.size(); ++k) {
    CHECK(t1[k].id == t2[k].id);
    CHECK(t1[k].parent == t2[k].parent);
    CHECK(t1[k].bound == t2[k].bound);
  }
}

TEST_CASE("node limit stops with a valid bound") {
  // Pick a game the solver needs several nodes for.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const GameSpec g = random_game(seed, {.max_follower_dim = 3});
    const SingleLevelProblem p = build_upper_mpcc(g);
    const Solution full = solve(p, tight());
    if (full.status != SolveStatus::Optimal || full.nodes < 4) continue;
    CAPTURE(seed);
    BnbConfig c = tight();
    c.node_limit = 1;
    const Solution s = solve(p, c);
    REQUIRE(s.status == SolveStatus::TimeLimit);
    CHECK(s.nodes <= 1);
    const double sg = sense_sign(p.objective.sense);
    CHECK(sg * s.bound <= sg * full.objective + 1e-7 * std::max(1.0, std::abs(full.objective)));
    if (s.has_point()) {
      CHECK(sg * s.objective >= sg * full.objective - 1e-7 * std::max(1.0, std::abs(full.objective)));
      CHECK(check_feasibility(p, s.values, 1e-6).ok);
    }
    return;
  }
  FAIL("no multi-node instance found");
}

TEST_CASE("interdiction decomposition") {
  SUBCASE("vacuous bound leaves only the empty pattern") {
    GameSpec g = random_game(3, {.mode = CardinalityMode::Mixed});
    for (auto& c : g.cardinality) c.bound = static_cast<int>(c.indices.size());
    const PuResult r = solve_pu_decomposition(g, tight());
    // Patterns that interdict more are admissible too; the empty one must be
    // present and no table entry can beat the best.
    bool empty = false;
    for (const PuEntry& e : r.table) {
      bool zero = true;
      for (int v : e.u) zero = zero && v == 0;
      empty = empty || zero;
    }
    CHECK(empty);
    CHECK(r.table.size() == (1u << g.follower_total()));
  }

  SUBCASE("table entries are admissible and the best is the table minimum") {
    const GameSpec g = random_game(9, {.mode = CardinalityMode::Mixed});
    const PuResult r = solve_pu_decomposition(g, tight());
    REQUIRE(r.solution.status == SolveStatus::Optimal);
    const double sg = sense_sign(g.objective.sense);
    double best = kInf;
    for (const PuEntry& e : r.table) {
      const Vector u(e.u.begin(), e.u.end());
      CHECK(admissible_u(g, u));
      if (e.status == SolveStatus::Optimal) best = std::min(best, sg * e.value);
    }
    CHECK(sg * r.solution.objective == doctest::Approx(best).epsilon(1e-12));
  }

  SUBCASE("two-station facility") {
    facility::FacilityParams params = facility::desk_scale({}, 2, 2);
    params.seed = 4;
    const facility::FacilityInstance inst = facility::generate(params);
    const GameSpec g = facility::to_game(inst, CardinalityMode::Mixed);
    const PuResult r = solve_pu_decomposition(g, tight());
    const Solution s = solve(build_mixed_final(g), tight());
    REQUIRE(s.status == SolveStatus::Optimal);
    REQUIRE(r.solution.status == SolveStatus::Optimal);
    CHECK(close(r.solution.objective, s.objective, kValueTol));
  }
}

TEST_CASE("incumbents are followers' equilibria") {
  for (std::uint64_t seed = 30; seed <= 36; ++seed) {
    CAPTURE(seed);
    const GameSpec g = random_game(seed, {.mode = CardinalityMode::Mixed});
    const SingleLevelProblem p = build_mixed_final(g);
    const Solution s = solve(p, tight());
    REQUIRE(s.status == SolveStatus::Optimal);
    const GamePoint pt = extract_point(p, s.values);
    const gnep::EquilibriumReport rep = gnep::verify_equilibrium(g, pt.x, pt.u, pt.y, 1e-6);
    CHECK(rep.pass);
  }
}

}  // namespace
}  // namespace slmf::solver
