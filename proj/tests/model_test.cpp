#include <cmath>
#include <random>

#include "doctest.h"
#include "slmf/facility.hpp"
#include "slmf/io.hpp"
#include "slmf/model.hpp"
#include "support/games.hpp"
#include "support/oracles.hpp"

namespace slmf {
namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  for (const auto& x : v) {
    if (x.code == code) return true;
  }
  return false;
}

TEST_CASE("bundled examples validate") {
  CHECK(validate(testing::infeasible_example()).empty());
  CHECK(validate(testing::local_min_example()).empty());
}

TEST_CASE("validate flags cardinality problems") {
  GameSpec g = testing::infeasible_example();
  SUBCASE("bound above set size") {
    g.cardinality[0].bound = 3;
    CHECK(has_code(validate(g), "CARD_BOUND_EXCEEDS_SET"));
  }
  SUBCASE("overlapping sets") {
    g.cardinality.push_back({{{0, 0}}, 1});
    CHECK(has_code(validate(g), "OVERLAPPING_CARD_SETS"));
  }
  SUBCASE("index out of range") {
    g.cardinality[0].indices.push_back({1, 4});
    CHECK(has_code(validate(g), "CARD_INDEX_OUT_OF_RANGE"));
  }
  SUBCASE("negative bound") {
    g.cardinality[0].bound = -1;
    CHECK(has_code(validate(g), "CARD_NEGATIVE_BOUND"));
  }
}

TEST_CASE("validate flags data problems") {
  GameSpec g = testing::infeasible_example();
  SUBCASE("beta sign") {
    g.followers[0].beta[0] = -1.0;  // concave for a minimizer
    CHECK(has_code(validate(g), "BETA_SIGN"));
  }
  SUBCASE("non-finite") {
    g.followers[1].gamma[0] = NAN;
    CHECK(has_code(validate(g), "NONFINITE_VALUE"));
  }
  SUBCASE("dimensions") {
    g.followers[0].C = Matrix(2, 1);
    CHECK(has_code(validate(g), "DIMENSION_MISMATCH"));
  }
  SUBCASE("bounds") {
    g.leader.lower[0] = 3.0;
    CHECK(has_code(validate(g), "BOUND_ORDER"));
  }
  SUBCASE("binary bounds") {
    g.leader.binary[0] = true;  // x in [1, 2]
    CHECK(has_code(validate(g), "BINARY_BOUNDS"));
  }
  SUBCASE("negative quadratic weight") {
    g.objective.quad.push_back({-1.0, {1.0, 0.0, 0.0}});
    CHECK(has_code(validate(g), "QUAD_WEIGHT_NEGATIVE"));
  }
}

TEST_CASE("validate is pure") {
  GameSpec g = testing::infeasible_example();
  g.cardinality[0].bound = 5;
  g.followers[0].beta[0] = -2.0;
  CHECK(validate(g) == validate(g));
}

TEST_CASE("follower objective examples") {
  SUBCASE("zero point") {
    GameSpec g = testing::local_min_example();
    g.followers[0].alpha0 = {1.0};
    const Vector x{0.5}, y{0.0, 0.0};
    CHECK(follower_objective(g, 0, x, y) == 0.0);
  }
  SUBCASE("single-station facility driver") {
    facility::FacilityInstance inst;
    inst.params = facility::desk_scale({}, 1, 1);
    inst.p = Matrix(1, 1);
    inst.p(0, 0) = 2.0;
    inst.alpha = {1.0};
    inst.xi = {1.0};
    const GameSpec g = facility::to_game(inst, CardinalityMode::Upper);
    const Vector x{1.0}, y{1.0};
    CHECK(follower_objective(g, 0, x, y) == doctest::Approx(1.0));
  }
  SUBCASE("infeasible example follower 1") {
    const GameSpec g = testing::infeasible_example();
    const Vector x{1.5}, y{0.75, 0.75};
    CHECK(follower_objective(g, 0, x, y) == doctest::Approx(0.75));
  }
}

TEST_CASE("follower gradient examples") {
  GameSpec g = testing::local_min_example();
  g.followers[0].alpha0 = {3.0};
  const Vector x{0.0};
  CHECK(follower_gradient(g, 0, x, Vector{1.0, 0.0})[0] == doctest::Approx(3.0));
  g.followers[0].sense = Sense::Maximize;
  g.followers[0].beta = {-1.0};
  CHECK(follower_gradient(g, 0, x, Vector{1.0, 0.0})[0] == doctest::Approx(1.0));
}

TEST_CASE("dimension mismatch throws") {
  const GameSpec g = testing::infeasible_example();
  CHECK_THROWS_AS(follower_objective(g, 0, Vector{1.0}, Vector{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(follower_gradient(g, 0, Vector{}, Vector{1.0, 1.0}), std::invalid_argument);
}

// Central differences on facility drivers and random games, 150 draws.
TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  facility::FacilityParams pr = facility::desk_scale({}, 5, 4);
  pr.seed = 9;
  const GameSpec fac = facility::to_game(facility::generate(pr), CardinalityMode::Upper);
  int draws = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const GameSpec g =
        trial % 2 == 0 ? fac : testing::random_game(trial, {.strictly_convex = trial % 4 == 1});
    Vector x(g.leader_dim()), y(g.follower_total());
    for (double& v : x) v = u(gen);
    for (double& v : y) v = 2.0 * u(gen) - 0.5;
    const int i = trial % g.num_followers();
    const Vector grad = follower_gradient(g, i, x, y);
    for (int k = 0; k < g.followers[i].dim; ++k) {
      const double h = 1e-6;
      Vector yp = y, ym = y;
      yp[g.offset(i) + k] += h;
      ym[g.offset(i) + k] -= h;
      const double fd =
          (follower_objective(g, i, x, yp) - follower_objective(g, i, x, ym)) / (2 * h);
      CHECK(std::abs(fd - grad[k]) <= 1e-4 * std::max(1.0, std::abs(grad[k])));
    }
    ++draws;
  }
  CHECK(draws >= 100);
}

TEST_CASE("game JSON round trip is bit-identical") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GameSpec g = testing::random_game(seed, {.strictly_convex = seed % 2 == 0});
    if (seed % 3 == 0) g.mode = CardinalityMode::Mixed;
    const GameSpec back = io::game_from_json(io::Json::parse(io::to_json(g).dump()));
    CHECK(back == g);
  }
  facility::FacilityParams pr = facility::desk_scale({}, 6, 5);
  const GameSpec fac = facility::to_game(facility::generate(pr), CardinalityMode::Mixed);
  CHECK(io::game_from_json(io::Json::parse(io::to_json(fac).dump())) == fac);
}

TEST_CASE("malformed game files are rejected") {
  CHECK_THROWS_AS(io::game_from_json(io::Json::parse(R"({"leader": {}})")), std::runtime_error);
  io::Json j = io::to_json(testing::infeasible_example());
  j["mode"] = "sideways";
  CHECK_THROWS_AS(io::game_from_json(j), std::runtime_error);
}

TEST_CASE("leader objective adds quadratic terms in the internal sense") {
  GameSpec g = testing::local_min_example();
  g.objective.quad.push_back({2.0, {0.0, 1.0, 1.0}});
  const Vector x{0.0}, y{1.0, 1.0};
  // min: y1 - 2 y2 + 2 (y1 + y2)^2
  CHECK(leader_objective(g, x, y) == doctest::Approx(-1.0 + 8.0));
  g.objective.sense = Sense::Maximize;
  CHECK(leader_objective(g, x, y) == doctest::Approx(-1.0 - 8.0));
}

}  // namespace
}  // namespace slmf
