#include "slmf/facility.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "slmf/rng.hpp"

namespace slmf::facility {

using nlohmann::json;

void check(const FacilityParams& params) {
  if (params.drivers <= 0) throw std::invalid_argument("driver count must be positive");
  if (params.stations <= 0 || params.stations > kMaxStations) {
    throw std::invalid_argument("station count must be within 1.." + std::to_string(kMaxStations));
  }
  if (static_cast<int>(params.types.size()) != params.stations) {
    throw std::invalid_argument("one type per station is required");
  }
  for (int t : params.types) {
    if (t < 1 || t > 3) throw std::invalid_argument("station types are 1, 2 or 3");
  }
  for (int k = 0; k < 3; ++k) {
    if (!(params.install_cost[k] > 0.0) || !(params.price[k] > 0.0) || params.capacity[k] <= 0) {
      throw std::invalid_argument("costs, prices and capacities must be positive");
    }
  }
  if (!(params.horizon > 0.0) || !(params.congestion_scale > 0.0) || !(params.xi_sigma >= 0.0)) {
    throw std::invalid_argument("horizon, congestion scale and xi spread must be positive");
  }
}

FacilityParams desk_scale(const FacilityParams& params, int drivers, int stations) {
  if (drivers <= 0 || stations <= 0 || stations > kMaxStations) {
    throw std::invalid_argument("desk scale needs drivers > 0 and 1 <= stations <= 10");
  }
  FacilityParams out = params;
  out.drivers = drivers;
  out.stations = stations;
  out.types.assign(kStationTypes.begin(), kStationTypes.begin() + stations);
  for (int& k : out.capacity) {
    k = std::max(1, static_cast<int>(std::lround(k * drivers / 150.0)));
  }
  return out;
}

FacilityInstance generate(const FacilityParams& params) {
  check(params);
  FacilityInstance inst;
  inst.params = params;
  const int n = params.drivers;
  const int m = params.stations;
  Rng pos(params.seed, Rng::kStreamPositions);
  inst.driver_pos.resize(n);
  inst.station_pos.resize(m);
  for (auto& d : inst.driver_pos) {
    d[0] = pos.uniform();
    d[1] = pos.uniform();
  }
  for (auto& s : inst.station_pos) {
    s[0] = pos.uniform();
    s[1] = pos.uniform();
  }
  inst.p = Matrix(n, m);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < m; ++s) {
      const double d = std::hypot(inst.driver_pos[i][0] - inst.station_pos[s][0],
                                  inst.driver_pos[i][1] - inst.station_pos[s][1]);
      inst.p(i, s) = 1.0 / std::max(d, kMinDistance) - params.price_of(s);
    }
  }
  Rng cong(params.seed, Rng::kStreamCongestion);
  const double sigma = params.xi_variance ? std::sqrt(params.xi_sigma) : params.xi_sigma;
  for (int s = 0; s < m; ++s) {
    inst.xi.push_back(cong.lognormal(params.xi_mu, sigma));
    inst.alpha.push_back(params.congestion_scale * inst.xi.back() / params.capacity_of(s));
  }
  return inst;
}

GameSpec to_game(const FacilityInstance& inst, CardinalityMode mode) {
  const FacilityParams& pr = inst.params;
  const int n = pr.drivers;
  const int m = pr.stations;
  const int q = n * m;
  GameSpec g;
  g.mode = mode;
  g.leader.A = Matrix(0, m);
  g.leader.lower.assign(m, 0.0);
  g.leader.upper.assign(m, 1.0);
  g.leader.binary.assign(m, true);

  g.objective.sense = Sense::Maximize;
  g.objective.cx.resize(m);
  g.objective.cy.resize(q);
  for (int s = 0; s < m; ++s) {
    g.objective.cx[s] = -pr.cost_of(s);
    QuadTerm t;
    t.weight = pr.horizon * inst.alpha[s];
    t.direction.assign(m + q, 0.0);
    for (int i = 0; i < n; ++i) {
      g.objective.cy[i * m + s] = pr.horizon * (pr.price_of(s) + inst.p(i, s));
      t.direction[m + i * m + s] = 1.0;
    }
    g.objective.quad.push_back(std::move(t));
  }

  const int rows = 2 * m + 2;
  for (int i = 0; i < n; ++i) {
    FollowerData f;
    f.dim = m;
    f.sense = Sense::Maximize;
    f.B = Matrix(rows, m);
    f.C = Matrix(rows, m);
    f.D = Matrix(rows, q - m);
    f.gamma.assign(rows, 0.0);
    for (int s = 0; s < m; ++s) {
      f.B(s, s) = -1.0;  // y_is - x_s <= 0
      f.C(s, s) = 1.0;
      f.C(m + s, s) = -1.0;  // -y_is <= 0
      f.C(2 * m, s) = 1.0;
      f.C(2 * m + 1, s) = -1.0;
    }
    f.gamma[2 * m] = 1.0;
    f.gamma[2 * m + 1] = -1.0;
    f.alpha0.resize(m);
    f.alpha_x = Matrix(m, m);
    f.alpha_y = Matrix(m, q - m);
    f.beta.resize(m);
    for (int s = 0; s < m; ++s) {
      f.alpha0[s] = inst.p(i, s);
      f.beta[s] = -inst.alpha[s];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int slot = (j < i ? j : j - 1) * m + s;
        f.alpha_y(s, slot) = -inst.alpha[s];
      }
    }
    g.followers.push_back(std::move(f));
  }
  for (int s = 0; s < m; ++s) {
    CardinalityConstraint c;
    for (int i = 0; i < n; ++i) c.indices.push_back({i, s});
    // A capacity above the driver count never binds.
    c.bound = std::min(pr.capacity_of(s), n);
    g.cardinality.push_back(std::move(c));
  }
  return g;
}

Outcome evaluate(const FacilityInstance& inst, std::span<const double> x,
                 std::span<const double> y) {
  const FacilityParams& pr = inst.params;
  const int n = pr.drivers;
  const int m = pr.stations;
  if (x.size() != static_cast<std::size_t>(m) || y.size() != static_cast<std::size_t>(n * m)) {
    throw std::invalid_argument("point does not match the instance dimensions");
  }
  Outcome o;
  for (int s = 0; s < m; ++s) {
    double load = 0.0;
    for (int i = 0; i < n; ++i) load += y[i * m + s];
    o.profit += pr.horizon * pr.price_of(s) * load - pr.cost_of(s) * x[s];
    for (int i = 0; i < n; ++i) {
      o.benefit += pr.horizon * (inst.p(i, s) - inst.alpha[s] * load) * y[i * m + s];
    }
  }
  o.welfare = o.profit + o.benefit;
  return o;
}

json to_json(const FacilityInstance& inst) {
  const FacilityParams& pr = inst.params;
  json params = {{"drivers", pr.drivers},
                 {"stations", pr.stations},
                 {"types", pr.types},
                 {"install_cost", pr.install_cost},
                 {"price", pr.price},
                 {"capacity", pr.capacity},
                 {"horizon", pr.horizon},
                 {"congestion_scale", pr.congestion_scale},
                 {"xi_mu", pr.xi_mu},
                 {"xi_sigma", pr.xi_sigma},
                 {"xi_spread", pr.xi_variance ? "variance" : "stddev"},
                 {"min_distance", kMinDistance}};
  json p = json::array();
  for (int i = 0; i < inst.p.rows; ++i) {
    auto r = inst.p.row(i);
    p.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"params", params},
          {"seed", pr.seed},
          {"positions", {{"drivers", inst.driver_pos}, {"stations", inst.station_pos}}},
          {"p", p},
          {"xi", inst.xi},
          {"alpha", inst.alpha}};
}

FacilityInstance instance_from_json(const json& j) {
  try {
    FacilityInstance inst;
    const json& pj = j.at("params");
    FacilityParams& pr = inst.params;
    pr.drivers = pj.at("drivers").get<int>();
    pr.stations = pj.at("stations").get<int>();
    pr.types = pj.at("types").get<std::vector<int>>();
    pr.install_cost = pj.at("install_cost").get<std::array<double, 3>>();
    pr.price = pj.at("price").get<std::array<double, 3>>();
    pr.capacity = pj.at("capacity").get<std::array<int, 3>>();
    pr.horizon = pj.at("horizon").get<double>();
    pr.congestion_scale = pj.at("congestion_scale").get<double>();
    pr.xi_mu = pj.at("xi_mu").get<double>();
    pr.xi_sigma = pj.at("xi_sigma").get<double>();
    pr.xi_variance = pj.value("xi_spread", "stddev") == "variance";
    pr.seed = j.at("seed").get<std::uint64_t>();
    check(pr);
    inst.driver_pos = j.at("positions").at("drivers").get<std::vector<std::array<double, 2>>>();
    inst.station_pos = j.at("positions").at("stations").get<std::vector<std::array<double, 2>>>();
    const auto p = j.at("p").get<std::vector<std::vector<double>>>();
    inst.xi = j.at("xi").get<Vector>();
    inst.alpha = j.at("alpha").get<Vector>();
    if (static_cast<int>(p.size()) != pr.drivers ||
        static_cast<int>(inst.alpha.size()) != pr.stations ||
        static_cast<int>(inst.driver_pos.size()) != pr.drivers ||
        static_cast<int>(inst.station_pos.size()) != pr.stations) {
      throw std::runtime_error("instance arrays do not match params");
    }
    inst.p = Matrix(pr.drivers, pr.stations);
    for (int i = 0; i < pr.drivers; ++i) {
      if (static_cast<int>(p[i].size()) != pr.stations) {
        throw std::runtime_error("p row " + std::to_string(i) + " has the wrong length");
      }
      for (int s = 0; s < pr.stations; ++s) inst.p(i, s) = p[i][s];
    }
    return inst;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed facility instance: ") + e.what());
  }
}

void write_p_csv(std::ostream& os, const FacilityInstance& inst) {
  os << "driver,station,p\n" << std::setprecision(17);
  for (int i = 0; i < inst.p.rows; ++i) {
    for (int s = 0; s < inst.p.cols; ++s) os << i << ',' << s << ',' << inst.p(i, s) << '\n';
  }
}

void write_alpha_csv(std::ostream& os, const FacilityInstance& inst) {
  os << "station,type,xi,alpha\n" << std::setprecision(17);
  for (int s = 0; s < inst.params.stations; ++s) {
    os << s << ',' << inst.params.types[s] << ',' << inst.xi[s] << ',' << inst.alpha[s] << '\n';
  }
}

}  // namespace slmf::facility
