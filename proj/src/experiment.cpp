#include "slmf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "slmf/gnep.hpp"

namespace slmf::experiment {

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::Auto: return "auto";
    case Formulation::UpperMpcc: return "upper-mpcc";
    case Formulation::MixedFinal: return "mixed-final";
    case Formulation::Enumerate: return "enumerate";
    case Formulation::Pu: return "pu";
  }
  return "auto";
}

Formulation parse_formulation(const std::string& name) {
  for (Formulation f : {Formulation::Auto, Formulation::UpperMpcc, Formulation::MixedFinal,
                        Formulation::Enumerate, Formulation::Pu}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown formulation '" + name + "'");
}

namespace {

SingleLevelProblem auto_problem(const GameSpec& spec) {
  if (spec.mode == CardinalityMode::Upper) {
    ReformulationOptions opt;
    opt.binary_u = true;
    return build_upper_mpcc(spec, opt);
  }
  return build_mixed_final(spec);
}

SolveStatus parse_status(const std::string& s) {
  for (SolveStatus st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                         SolveStatus::TimeLimit}) {
    if (s == to_string(st)) return st;
  }
  throw std::runtime_error("unknown status '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

GameSolve solve_game(const GameSpec& spec, Formulation f, const solver::BnbConfig& config) {
  const bool upper = spec.mode == CardinalityMode::Upper;
  if ((f == Formulation::UpperMpcc && !upper) || (f == Formulation::MixedFinal && upper) ||
      (f == Formulation::Pu && upper)) {
    throw std::invalid_argument(std::string("formulation ") + to_string(f) + " does not fit the " +
                                (upper ? "upper" : "mixed") + " mode");
  }
  GameSolve run;
  if (f == Formulation::Pu) {
    run.problem = build_mixed_final(spec);
    run.solution = solver::solve_pu_decomposition(spec, config).solution;
  } else {
    run.problem = auto_problem(spec);
    run.solution = f == Formulation::Enumerate ? solver::enumerate(run.problem, config)
                                               : solver::solve(run.problem, config);
  }
  if (run.solution.has_point()) run.point = extract_point(run.problem, run.solution.values);
  return run;
}

Vector follower_u(const GameSpec& spec, const GamePoint& point) {
  if (spec.mode == CardinalityMode::Upper) return {};
  return point.u;
}

bool RunRecord::feasible() const { return std::isfinite(objective); }

RunRecord make_record(const std::string& case_id, const std::string& config,
                      const facility::FacilityInstance& inst, const GameSolve& run) {
  RunRecord r;
  r.case_id = case_id;
  r.config = config;
  r.status = run.solution.status;
  r.objective = run.solution.has_point() ? run.solution.objective
                                         : std::numeric_limits<double>::quiet_NaN();
  r.gap = run.solution.gap;
  r.time = run.solution.wall_time;
  r.nodes = run.solution.nodes;
  if (run.solution.has_point()) {
    const facility::Outcome o = facility::evaluate(inst, run.point.x, run.point.y);
    r.profit = o.profit;
    r.benefit = o.benefit;
    r.welfare = o.welfare;
    for (double v : run.point.x) r.built.push_back(v > 0.5 ? 1 : 0);
  } else {
    r.profit = r.benefit = r.welfare = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kCsvHeader << '\n' << std::setprecision(15);
  for (const auto& r : records) {
    os << r.case_id << ',' << r.config << ',' << to_string(r.status) << ',' << r.objective << ','
       << r.profit << ',' << r.benefit << ',' << r.welfare << ',' << r.gap << ',' << r.time
       << ',' << r.nodes << '\n';
  }
}

std::vector<RunRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kCsvHeader) {
    throw std::runtime_error(std::string("expected CSV header '") + kCsvHeader + "'");
  }
  std::vector<RunRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 10) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 10 fields");
    }
    try {
      RunRecord r;
      r.case_id = c[0];
      r.config = c[1];
      r.status = parse_status(c[2]);
      r.objective = parse_double(c[3]);
      r.profit = parse_double(c[4]);
      r.benefit = parse_double(c[5]);
      r.welfare = parse_double(c[6]);
      r.gap = parse_double(c[7]);
      r.time = parse_double(c[8]);
      r.nodes = static_cast<long>(parse_double(c[9]));
      out.push_back(std::move(r));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_built_csv(std::ostream& os, const std::vector<RunRecord>& records,
                     const std::vector<int>& types) {
  os << kBuiltHeader << '\n';
  for (const auto& r : records) {
    if (!r.feasible()) continue;
    for (std::size_t s = 0; s < r.built.size(); ++s) {
      os << r.case_id << ',' << r.config << ',' << s << ',' << types.at(s) << ',' << r.built[s]
         << '\n';
    }
  }
}

std::vector<BuiltRow> read_built_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kBuiltHeader) {
    throw std::runtime_error(std::string("expected CSV header '") + kBuiltHeader + "'");
  }
  std::vector<BuiltRow> out;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 5) throw std::runtime_error("built-station row needs 5 fields: " + line);
    out.push_back({c[0], c[1], static_cast<int>(parse_double(c[2])),
                   static_cast<int>(parse_double(c[3])), static_cast<int>(parse_double(c[4]))});
  }
  return out;
}

std::vector<ConfigSummary> summarize(const std::vector<RunRecord>& records) {
  std::vector<ConfigSummary> out;
  for (const char* cfg : {"upper", "mixed"}) {
    ConfigSummary s;
    s.config = cfg;
    for (const auto& r : records) {
      if (r.config != cfg) continue;
      ++s.cases;
      s.avg_time += r.time;
      if (r.status == SolveStatus::Optimal) ++s.optimal;
      if (!r.feasible()) continue;
      ++s.feasible;
      s.avg_gap += r.gap;
      s.avg_profit += r.profit;
      s.avg_benefit += r.benefit;
      s.avg_welfare += r.welfare;
    }
    if (s.cases > 0) s.avg_time /= s.cases;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double f = s.feasible;
    s.avg_gap = s.feasible ? s.avg_gap / f : nan;
    s.avg_profit = s.feasible ? s.avg_profit / f : nan;
    s.avg_benefit = s.feasible ? s.avg_benefit / f : nan;
    s.avg_welfare = s.feasible ? s.avg_welfare / f : nan;
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& os, const std::vector<ConfigSummary>& summary) {
  os << "config,cases,feasible,optimal,avg_gap,avg_time,avg_profit,avg_benefit,avg_welfare\n"
     << std::setprecision(10);
  for (const auto& s : summary) {
    os << s.config << ',' << s.cases << ',' << s.feasible << ',' << s.optimal << ',' << s.avg_gap
       << ',' << s.avg_time << ',' << s.avg_profit << ',' << s.avg_benefit << ','
       << s.avg_welfare << '\n';
  }
}

std::vector<RunRecord> compare(const CompareOptions& options) {
  const facility::FacilityParams params =
      facility::desk_scale(facility::FacilityParams{}, options.drivers, options.stations);
  const int cases = static_cast<int>(options.seeds.size());
  std::vector<RunRecord> rows(2 * cases);
  solver::BnbConfig cfg = options.solver;
  cfg.log = nullptr;
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (int t = 0; t < 2 * cases; ++t) {
    facility::FacilityParams pr = params;
    pr.seed = options.seeds[t / 2];
    const facility::FacilityInstance inst = facility::generate(pr);
    const bool upper = t % 2 == 0;
    const GameSpec spec =
        facility::to_game(inst, upper ? CardinalityMode::Upper : CardinalityMode::Mixed);
    const GameSolve run = solve_game(spec, Formulation::Auto, cfg);
    RunRecord r = make_record(std::to_string(pr.seed), upper ? "upper" : "mixed", inst, run);
    if (run.solution.has_point()) {
      r.verified = gnep::verify_equilibrium(spec, run.point.x, follower_u(spec, run.point),
                                            run.point.y, options.verify_tol)
                       .pass;
    }
    rows[t] = std::move(r);
  }
  return rows;
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << std::setprecision(15);
  return os;
}

}  // namespace

ReportFiles report(const std::vector<RunRecord>& records, const std::vector<BuiltRow>& built,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  ReportFiles files;
  files.gap = (fs::path(out_dir) / "gap_per_case.csv").string();
  files.boxplot = (fs::path(out_dir) / "objective_boxplot.csv").string();
  files.built = (fs::path(out_dir) / "built_types.csv").string();

  {
    std::ofstream os = open_out(files.gap);
    os << "case,config,gap\n";
    for (const auto& r : records) {
      if (!r.feasible()) continue;
      os << r.case_id << ',' << r.config << ',' << r.gap << '\n';
      ++files.gap_rows;
    }
  }
  {
    std::ofstream os = open_out(files.boxplot);
    os << "config,count,min,q1,median,q3,max\n";
    for (const char* cfg : {"upper", "mixed"}) {
      std::vector<double> v;
      for (const auto& r : records) {
        if (r.config == cfg && r.feasible()) v.push_back(r.objective);
      }
      std::sort(v.begin(), v.end());
      os << cfg << ',' << v.size();
      if (v.empty()) {
        os << ",nan,nan,nan,nan,nan\n";
      } else {
        os << ',' << v.front() << ',' << quantile(v, 0.25) << ',' << quantile(v, 0.5) << ','
           << quantile(v, 0.75) << ',' << v.back() << '\n';
      }
      ++files.boxplot_rows;
    }
  }
  {
    // Keyed by (case, config) in record order.
    std::map<std::pair<std::string, std::string>, std::array<int, 3>> counts;
    for (const auto& b : built) {
      if (b.type < 1 || b.type > 3) throw std::runtime_error("station type out of range");
      counts[{b.case_id, b.config}][b.type - 1] += b.built;
    }
    std::ofstream os = open_out(files.built);
    os << "case,config,type1,type2,type3,total\n";
    for (const auto& r : records) {
      if (!r.feasible()) continue;
      const auto it = counts.find({r.case_id, r.config});
      if (it == counts.end()) {
        throw std::runtime_error("no built-station rows for case " + r.case_id + " " + r.config);
      }
      const auto& c = it->second;
      os << r.case_id << ',' << r.config << ',' << c[0] << ',' << c[1] << ',' << c[2] << ','
         << c[0] + c[1] + c[2] << '\n';
      ++files.built_rows;
    }
  }
  return files;
}

}  // namespace slmf::experiment
