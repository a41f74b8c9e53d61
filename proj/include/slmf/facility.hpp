// Charging-station location instances: a planner builds stations, drivers
// split their weekly charge over the built ones under congestion.
#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"
#include "slmf/model.hpp"

namespace slmf::facility {

inline constexpr int kMaxStations = 10;

// Station types 1..3 of the ten candidate locations.
inline constexpr std::array<int, kMaxStations> kStationTypes = {1, 1, 1, 1, 1, 2, 2, 2, 3, 3};

struct FacilityParams {
  int drivers = 150;
  int stations = 10;
  std::vector<int> types{kStationTypes.begin(), kStationTypes.end()};
  std::array<double, 3> install_cost = {10000.0, 30000.0, 50000.0};
  std::array<double, 3> price = {9.0, 15.0, 28.0};
  std::array<int, 3> capacity = {20, 40, 100};
  double horizon = 52.0;
  double congestion_scale = 28.0;
  // Parameters of the normal underlying xi_s. The second one is a standard
  // deviation unless xi_variance is set.
  double xi_mu = 0.1;
  double xi_sigma = 0.05;
  bool xi_variance = false;
  std::uint64_t seed = 1;

  double cost_of(int s) const { return install_cost[types[s] - 1]; }
  double price_of(int s) const { return price[types[s] - 1]; }
  int capacity_of(int s) const { return capacity[types[s] - 1]; }
};

// Throws std::invalid_argument on nonpositive counts, more than ten
// stations, unknown types or nonpositive costs and capacities.
void check(const FacilityParams& params);

// First `stations` locations of the typed list, capacities scaled by
// drivers / 150 (rounded, at least 1). Costs and prices are kept.
FacilityParams desk_scale(const FacilityParams& params, int drivers, int stations);

inline constexpr double kMinDistance = 1e-6;

struct FacilityInstance {
  FacilityParams params;
  std::vector<std::array<double, 2>> driver_pos;
  std::vector<std::array<double, 2>> station_pos;
  Matrix p;      // drivers x stations
  Vector xi;
  Vector alpha;  // congestion per station
};

// Positions uniform in [0,1]^2 (drivers then stations, one substream),
// p_is = 1 / max(d_is, 1e-6) - a_s, alpha_s = scale * xi_s / K_s with
// lognormal xi_s from a second substream.
FacilityInstance generate(const FacilityParams& params);

// Leader: binary x_s, maximizes welfare
//   sum_s (T a_s sum_i y_is - c_s x_s) + T sum_i f_i.
// Driver i: maximizes sum_s (p_is - alpha_s sum_j y_js) y_is over
//   sum_s y_is = 1 (two rows), y_is <= x_s, y_is >= 0.
// Station s: at most K_s drivers with y_is != 0.
GameSpec to_game(const FacilityInstance& inst, CardinalityMode mode);

struct Outcome {
  double profit = 0.0;   // sum_s (T a_s sum_i y_is - c_s x_s)
  double benefit = 0.0;  // T sum_i f_i
  double welfare = 0.0;  // profit + benefit
};

Outcome evaluate(const FacilityInstance& inst, std::span<const double> x,
                 std::span<const double> y);

// Keys params, positions, p, alpha, xi, seed.
nlohmann::json to_json(const FacilityInstance& inst);
FacilityInstance instance_from_json(const nlohmann::json& j);

// Header driver,station,p and station,type,xi,alpha respectively.
void write_p_csv(std::ostream& os, const FacilityInstance& inst);
void write_alpha_csv(std::ostream& os, const FacilityInstance& inst);

}  // namespace slmf::facility
