// slmf: generate facility instances, solve and verify games, compare the
// upper and mixed configurations, and emit plot data.
//
// Exit codes: 0 optimal / verified, 1 error, 2 infeasible / verification
// failed, 3 time limit, 4 unbounded.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "slmf/experiment.hpp"
#include "slmf/facility.hpp"
#include "slmf/gnep.hpp"
#include "slmf/io.hpp"
#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"

namespace {

using namespace slmf;
using Json = io::Json;

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::TimeLimit: return 3;
    case SolveStatus::Unbounded: return 4;
  }
  return 1;
}

CardinalityMode parse_mode(const std::string& m) {
  if (m == "upper") return CardinalityMode::Upper;
  if (m == "mixed") return CardinalityMode::Mixed;
  throw std::invalid_argument("mode must be upper or mixed, got '" + m + "'");
}

const char* mode_name(CardinalityMode m) { return m == CardinalityMode::Upper ? "upper" : "mixed"; }

// A game file or a facility instance (recognized by its params key).
struct Loaded {
  GameSpec spec;
  std::optional<facility::FacilityInstance> instance;
};

Loaded load(const std::string& path, const std::string& mode) {
  const Json j = io::read_json_file(path);
  Loaded out;
  if (j.contains("params")) {
    out.instance = facility::instance_from_json(j);
    out.spec = facility::to_game(*out.instance,
                                 mode.empty() ? CardinalityMode::Upper : parse_mode(mode));
  } else {
    out.spec = io::game_from_json(j);
    if (!mode.empty()) out.spec.mode = parse_mode(mode);
  }
  return out;
}

// "1,2,5-8" -> 1 2 5 6 7 8
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoull(item));
    } else {
      const std::uint64_t a = std::stoull(item.substr(0, dash));
      const std::uint64_t b = std::stoull(item.substr(dash + 1));
      if (b < a) throw std::invalid_argument("empty seed range " + item);
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    }
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

std::string sidecar(const std::string& csv) {
  std::filesystem::path p(csv);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string() + ".built.csv";
}

struct SolveArgs {
  std::string path;
  std::string mode;
  std::string formulation = "auto";
  double time_limit = 3600.0;
  double gap = 1e-6;
  long node_limit = 0;
  bool deterministic = false;
  bool progress = false;
  std::string out;
  std::string record;
  std::string lp_dump;
};

int cmd_solve(const SolveArgs& a) {
  const Loaded game = load(a.path, a.mode);
  solver::BnbConfig cfg;
  cfg.time_limit = a.time_limit;
  cfg.gap_tol = a.gap;
  if (a.node_limit > 0) cfg.node_limit = a.node_limit;
  if (a.progress) cfg.log = &std::cerr;
  const experiment::Formulation f = experiment::parse_formulation(a.formulation);
  const experiment::GameSolve run = experiment::solve_game(game.spec, f, cfg);
  if (!a.lp_dump.empty()) {
    std::ofstream os(a.lp_dump);
    if (!os) throw std::runtime_error("cannot write " + a.lp_dump);
    write_lp_text(os, run.problem);
  }
  Json j = io::to_json(run.solution, !a.deterministic);
  j["mode"] = mode_name(game.spec.mode);
  j["formulation"] = experiment::to_string(f);
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_json_file(a.out, j);
    std::cout << "status=" << to_string(run.solution.status)
              << " objective=" << run.solution.objective << " gap=" << run.solution.gap
              << " nodes=" << run.solution.nodes << '\n';
  }
  if (!a.record.empty()) {
    if (!game.instance) throw std::invalid_argument("--record needs a facility instance");
    std::ofstream os(a.record);
    if (!os) throw std::runtime_error("cannot write " + a.record);
    const auto rec = experiment::make_record(std::to_string(game.instance->params.seed),
                                             mode_name(game.spec.mode), *game.instance, run);
    experiment::write_csv(os, {rec});
  }
  return exit_code(run.solution.status);
}

// Values by name for one family: x[j], y[i][k] or u[i][k]. Missing names are
// dimension errors; interdiction values default to zero in the upper mode.
struct GameValues {
  Vector x, y, u;
};

GameValues values_for(const GameSpec& spec, const Solution& sol) {
  std::map<std::string, double> by_name;
  for (std::size_t k = 0; k < sol.names.size(); ++k) by_name[sol.names[k]] = sol.values[k];
  auto get = [&](const std::string& name, bool required) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      if (required) throw std::invalid_argument("solution does not match the game: no " + name);
      return 0.0;
    }
    return it->second;
  };
  GameValues v;
  for (int j = 0; j < spec.leader_dim(); ++j) v.x.push_back(get("x[" + std::to_string(j) + "]", true));
  for (int i = 0; i < spec.num_followers(); ++i) {
    for (int k = 0; k < spec.followers[i].dim; ++k) {
      const std::string idx = "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      v.y.push_back(get("y" + idx, true));
      v.u.push_back(get("u" + idx, spec.mode == CardinalityMode::Mixed));
    }
  }
  // Variables of a bigger game mean the solution belongs elsewhere.
  const std::string extra_y = "y[" + std::to_string(spec.num_followers()) + "][0]";
  if (by_name.count(extra_y) || by_name.count("x[" + std::to_string(spec.leader_dim()) + "]")) {
    throw std::invalid_argument("solution does not match the game: it has more variables");
  }
  for (int i = 0; i < spec.num_followers(); ++i) {
    const std::string extra =
        "y[" + std::to_string(i) + "][" + std::to_string(spec.followers[i].dim) + "]";
    if (by_name.count(extra)) {
      throw std::invalid_argument("solution does not match the game: it has " + extra);
    }
  }
  return v;
}

// Leader-level feasibility: bounds, A x <= b, integrality, cardinality.
Json leader_check(const GameSpec& spec, const GameValues& v, double tol, bool& ok) {
  Json issues = Json::array();
  const auto& L = spec.leader;
  for (int j = 0; j < spec.leader_dim(); ++j) {
    if (v.x[j] < L.lower[j] - tol || v.x[j] > L.upper[j] + tol) {
      issues.push_back("x[" + std::to_string(j) + "] outside its bounds");
    }
    if (L.binary[j] && std::abs(v.x[j] - std::round(v.x[j])) > tol) {
      issues.push_back("x[" + std::to_string(j) + "] is not integral");
    }
  }
  for (int r = 0; r < L.A.rows; ++r) {
    double lhs = 0.0;
    for (int j = 0; j < spec.leader_dim(); ++j) lhs += L.A(r, j) * v.x[j];
    if (lhs > L.b[r] + tol * std::max(1.0, std::abs(L.b[r]))) {
      issues.push_back("leader row " + std::to_string(r) + " violated");
    }
  }
  for (std::size_t l = 0; l < spec.cardinality.size(); ++l) {
    const auto& c = spec.cardinality[l];
    if (spec.mode == CardinalityMode::Upper) {
      int nonzero = 0;
      for (const auto& r : c.indices) nonzero += std::abs(v.y[spec.flat_index(r)]) > tol;
      if (nonzero > c.bound) issues.push_back("cardinality set " + std::to_string(l) + " exceeded");
    } else {
      double sum = 0.0;
      for (const auto& r : c.indices) sum += v.u[spec.flat_index(r)];
      if (sum < static_cast<double>(c.indices.size()) - c.bound - tol) {
        issues.push_back("interdiction row " + std::to_string(l) + " violated");
      }
    }
  }
  ok = issues.empty();
  return issues;
}

int cmd_verify(const std::string& game_path, const std::string& sol_path, double tol,
               std::string mode, const std::string& out) {
  const Json sj = io::read_json_file(sol_path);
  if (mode.empty() && sj.contains("mode")) mode = sj["mode"].get<std::string>();
  const Loaded game = load(game_path, mode);
  const Solution sol = io::solution_from_json(sj);
  if (!sol.has_point()) throw std::invalid_argument("solution has no point to verify");
  const GameValues v = values_for(game.spec, sol);
  bool leader_ok = false;
  Json issues = leader_check(game.spec, v, tol, leader_ok);
  const Vector u = game.spec.mode == CardinalityMode::Mixed ? v.u : Vector{};
  const gnep::EquilibriumReport rep = gnep::verify_equilibrium(game.spec, v.x, u, v.y, tol);
  Json j;
  j["equilibrium"] = io::to_json(rep);
  j["leader_feasible"] = leader_ok;
  j["leader_issues"] = issues;
  j["pass"] = leader_ok && rep.pass;
  if (out.empty()) std::cout << j.dump(2) << '\n';
  else io::write_json_file(out, j);
  for (const auto& f : rep.followers) {
    if (f.code != "OK" || f.residual > tol) {
      std::cerr << "follower " << f.index << ": " << f.code << " residual=" << f.residual
                << (f.message.empty() ? "" : " " + f.message) << '\n';
    }
  }
  for (const auto& s : issues) std::cerr << s.get<std::string>() << '\n';
  return leader_ok && rep.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("SLMF_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
  CLI::App app{"Single-leader multi-follower games with cardinality constraints"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int drivers = 8, stations = 4;
  bool xi_variance = false;
  std::string out;
  auto* gen = app.add_subcommand("generate", "Write a seeded facility instance");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--drivers", drivers, "Number of drivers")->check(CLI::PositiveNumber);
  gen->add_option("--stations", stations, "Number of stations (first N candidate sites)")
      ->check(CLI::Range(1, facility::kMaxStations));
  gen->add_flag("--xi-variance", xi_variance, "Read the lognormal spread as a variance");
  gen->add_option("-o,--out", out, "Instance file")->required();

  SolveArgs sa;
  auto* sol = app.add_subcommand("solve", "Solve a game or facility instance");
  sol->add_option("path", sa.path, "Game or instance JSON")->required()->check(CLI::ExistingFile);
  sol->add_option("--mode", sa.mode, "upper or mixed (default: from the game, upper for instances)")
      ->check(CLI::IsMember({"upper", "mixed"}));
  sol->add_option("--formulation", sa.formulation, "auto, upper-mpcc, mixed-final, enumerate, pu")
      ->check(CLI::IsMember({"auto", "upper-mpcc", "mixed-final", "enumerate", "pu"}));
  sol->add_option("--time-limit", sa.time_limit, "Seconds")->check(CLI::PositiveNumber);
  sol->add_option("--gap", sa.gap, "Relative gap tolerance")->check(CLI::PositiveNumber);
  sol->add_option("--node-limit", sa.node_limit, "Maximum nodes (0 = none)");
  sol->add_flag("--seed-deterministic", sa.deterministic,
                "Omit wall time so repeated runs write identical bytes");
  sol->add_flag("--progress", sa.progress, "Progress lines on stderr");
  sol->add_option("-o,--out", sa.out, "Solution JSON (default: stdout)");
  sol->add_option("--record", sa.record, "Run-record CSV (facility instances)");
  sol->add_option("--lp", sa.lp_dump, "Write the single-level problem as LP text");

  std::string game_path, sol_path, vmode, vout;
  double tol = 1e-6;
  auto* ver = app.add_subcommand("verify", "Check a solution against its game");
  ver->add_option("game", game_path, "Game or instance JSON")->required()->check(CLI::ExistingFile);
  ver->add_option("solution", sol_path, "Solution JSON")->required()->check(CLI::ExistingFile);
  ver->add_option("--tol", tol, "Residual tolerance")->check(CLI::PositiveNumber);
  ver->add_option("--mode", vmode, "Override the mode")->check(CLI::IsMember({"upper", "mixed"}));
  ver->add_option("-o,--out", vout, "Report JSON (default: stdout)");

  std::string seeds_text = "1-10", csv_out, summary_out;
  double cmp_time = 600.0, cmp_gap = 1e-6;
  int cmp_drivers = 8, cmp_stations = 4;
  auto* cmp = app.add_subcommand("compare", "Solve both configurations for seeded cases");
  cmp->add_option("--drivers", cmp_drivers, "Drivers per case")->check(CLI::PositiveNumber);
  cmp->add_option("--stations", cmp_stations, "Stations per case")
      ->check(CLI::Range(1, facility::kMaxStations));
  cmp->add_option("--seeds", seeds_text, "Seeds, e.g. 1-10 or 3,7,9");
  cmp->add_option("--time-limit", cmp_time, "Seconds per solve")->check(CLI::PositiveNumber);
  cmp->add_option("--gap", cmp_gap, "Relative gap tolerance")->check(CLI::PositiveNumber);
  cmp->add_option("-o,--out", csv_out, "Run-record CSV")->required();
  cmp->add_option("--summary", summary_out, "Summary CSV (default: stdout)");

  std::string report_csv, built_csv, report_dir;
  auto* rep = app.add_subcommand("report", "Plot data from a compare CSV");
  rep->add_option("csv", report_csv, "Compare output")->required()->check(CLI::ExistingFile);
  rep->add_option("--built", built_csv, "Built-station CSV (default: <csv>.built.csv)");
  rep->add_option("-o,--out-dir", report_dir, "Output directory")->required();

  std::string inst_path, prefix;
  auto* exp = app.add_subcommand("export", "Write p and alpha of an instance as CSV");
  exp->add_option("instance", inst_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--prefix", prefix, "Output prefix (writes <prefix>_p.csv, <prefix>_alpha.csv)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      facility::FacilityParams pr = facility::desk_scale({}, drivers, stations);
      pr.seed = seed;
      pr.xi_variance = xi_variance;
      io::write_json_file(out, facility::to_json(facility::generate(pr)));
      return 0;
    }
    if (*sol) return cmd_solve(sa);
    if (*ver) return cmd_verify(game_path, sol_path, tol, vmode, vout);
    if (*cmp) {
      experiment::CompareOptions opt;
      opt.drivers = cmp_drivers;
      opt.stations = cmp_stations;
      opt.seeds = parse_seeds(seeds_text);
      opt.solver.time_limit = cmp_time;
      opt.solver.gap_tol = cmp_gap;
      const auto rows = experiment::compare(opt);
      {
        std::ofstream os(csv_out);
        if (!os) throw std::runtime_error("cannot write " + csv_out);
        experiment::write_csv(os, rows);
        std::ofstream bs(sidecar(csv_out));
        experiment::write_built_csv(
            bs, rows, facility::desk_scale({}, cmp_drivers, cmp_stations).types);
      }
      const auto summary = experiment::summarize(rows);
      if (summary_out.empty()) {
        experiment::write_summary(std::cout, summary);
      } else {
        std::ofstream os(summary_out);
        experiment::write_summary(os, summary);
      }
      for (const auto& r : rows) {
        if (r.feasible() && !r.verified) {
          std::cerr << "case " << r.case_id << " " << r.config << ": equilibrium check failed\n";
        }
      }
      return 0;
    }
    if (*rep) {
      std::ifstream is(report_csv);
      const auto rows = experiment::read_csv(is);
      const std::string bpath = built_csv.empty() ? sidecar(report_csv) : built_csv;
      std::ifstream bs(bpath);
      if (!bs) throw std::runtime_error("cannot read " + bpath);
      const auto built = experiment::read_built_csv(bs);
      const auto files = experiment::report(rows, built, report_dir);
      std::cout << files.gap << " rows=" << files.gap_rows << '\n'
                << files.boxplot << " rows=" << files.boxplot_rows << '\n'
                << files.built << " rows=" << files.built_rows << '\n';
      return 0;
    }
    if (*exp) {
      const auto inst = facility::instance_from_json(io::read_json_file(inst_path));
      std::ofstream ps(prefix + "_p.csv");
      std::ofstream as(prefix + "_alpha.csv");
      if (!ps || !as) throw std::runtime_error("cannot write files with prefix " + prefix);
      facility::write_p_csv(ps, inst);
      facility::write_alpha_csv(as, inst);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
