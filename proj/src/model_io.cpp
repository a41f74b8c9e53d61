#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slmf/io.hpp"

namespace slmf::io {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v == 0.0 ? 0.0 : v;  // no negative zeros in files
  return nullptr;
}

double read_number(const Json& j, double if_null) {
  if (j.is_null()) return if_null;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
    throw std::runtime_error("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw std::runtime_error("expected a number");
  return j.get<double>();
}

Json vec(const Vector& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(number(d));
  return a;
}

Vector read_vec(const Json& j, const char* what, double if_null = kInf) {
  if (j.is_null()) return {};
  if (!j.is_array()) throw std::runtime_error(std::string(what) + " must be an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(read_number(e, if_null));
  return v;
}

Json mat(const Matrix& m) {
  Json a = Json::array();
  for (int r = 0; r < m.rows; ++r) {
    Json row = Json::array();
    for (double d : m.row(r)) row.push_back(d);
    a.push_back(std::move(row));
  }
  return a;
}

// Row-major array of arrays. An empty array yields a 0 x cols_hint matrix.
Matrix read_mat(const Json& j, int cols_hint, const char* what) {
  if (j.is_null()) return Matrix(0, cols_hint);
  if (!j.is_array()) throw std::runtime_error(std::string(what) + " must be an array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Matrix(0, cols_hint);
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
      throw std::runtime_error(std::string(what) + " has ragged rows");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = read_number(j[r][c], kInf);
  }
  return m;
}

const char* sense_name(Sense s) { return s == Sense::Minimize ? "min" : "max"; }

Sense read_sense(const Json& j) {
  if (j.is_null()) return Sense::Minimize;
  const std::string s = j.get<std::string>();
  if (s == "min" || s == "minimize") return Sense::Minimize;
  if (s == "max" || s == "maximize") return Sense::Maximize;
  throw std::runtime_error("unknown sense \"" + s + "\"");
}

const Json& field(const Json& j, const char* key) {
  static const Json null_json;
  auto it = j.find(key);
  return it == j.end() ? null_json : *it;
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "<=";
}

Json terms_json(const std::vector<Term>& terms) {
  Json a = Json::array();
  for (const auto& t : terms) a.push_back(Json::array({t.var, t.coef}));
  return a;
}

}  // namespace

Json to_json(const GameSpec& spec) {
  Json j;
  const auto& L = spec.leader;
  Json leader;
  leader["sense"] = sense_name(spec.objective.sense);
  leader["cx"] = vec(spec.objective.cx);
  leader["cy"] = vec(spec.objective.cy);
  Json quad = Json::array();
  for (const auto& q : spec.objective.quad) {
    quad.push_back({{"weight", q.weight}, {"direction", vec(q.direction)}});
  }
  leader["quad"] = quad;
  leader["A"] = mat(L.A);
  leader["b"] = vec(L.b);
  leader["lower"] = vec(L.lower);
  leader["upper"] = vec(L.upper);
  Json bin = Json::array();
  for (bool b : L.binary) bin.push_back(b);
  leader["binary"] = bin;
  j["leader"] = leader;

  Json followers = Json::array();
  for (const auto& f : spec.followers) {
    followers.push_back({{"dim", f.dim},
                         {"sense", sense_name(f.sense)},
                         {"B", mat(f.B)},
                         {"C", mat(f.C)},
                         {"D", mat(f.D)},
                         {"gamma", vec(f.gamma)},
                         {"alpha0", vec(f.alpha0)},
                         {"alphaX", mat(f.alpha_x)},
                         {"alphaY", mat(f.alpha_y)},
                         {"beta", vec(f.beta)}});
  }
  j["followers"] = followers;

  Json card = Json::array();
  for (const auto& c : spec.cardinality) {
    Json idx = Json::array();
    for (const auto& r : c.indices) idx.push_back(Json::array({r.follower, r.coord}));
    card.push_back({{"indices", idx}, {"K", c.bound}});
  }
  j["cardinality"] = card;
  j["mode"] = spec.mode == CardinalityMode::Upper ? "upper" : "mixed";
  return j;
}

GameSpec game_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("leader") || !j.contains("followers")) {
    throw std::runtime_error("game file needs top-level keys leader and followers");
  }
  GameSpec s;
  const Json& L = j["leader"];
  s.objective.sense = read_sense(field(L, "sense"));
  s.leader.lower = read_vec(field(L, "lower"), "leader.lower", -kInf);
  s.leader.upper = read_vec(field(L, "upper"), "leader.upper", kInf);
  const int p = static_cast<int>(s.leader.lower.size());
  s.objective.cx = read_vec(field(L, "cx"), "leader.cx");
  if (s.objective.cx.empty()) s.objective.cx.assign(p, 0.0);
  for (const auto& q : field(L, "quad")) {
    s.objective.quad.push_back({read_number(field(q, "weight"), 0.0),
                                read_vec(field(q, "direction"), "quad.direction")});
  }
  s.leader.A = read_mat(field(L, "A"), p, "leader.A");
  s.leader.b = read_vec(field(L, "b"), "leader.b");
  const Json& bin = field(L, "binary");
  if (bin.is_null()) {
    s.leader.binary.assign(p, false);
  } else {
    for (const auto& b : bin) s.leader.binary.push_back(b.get<bool>());
  }

  const Json& fs = j["followers"];
  if (!fs.is_array()) throw std::runtime_error("followers must be an array");
  int q = 0;
  std::vector<int> dims;
  for (const auto& f : fs) {
    const Json& dim = field(f, "dim");
    const int d = dim.is_null() ? static_cast<int>(field(f, "alpha0").size()) : dim.get<int>();
    dims.push_back(d);
    q += d;
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Json& f = fs[i];
    FollowerData fd;
    fd.dim = dims[i];
    fd.sense = read_sense(field(f, "sense"));
    fd.gamma = read_vec(field(f, "gamma"), "gamma");
    fd.B = read_mat(field(f, "B"), p, "B");
    fd.C = read_mat(field(f, "C"), fd.dim, "C");
    fd.D = read_mat(field(f, "D"), q - fd.dim, "D");
    // Constraint matrices may be given as [] when they are all zero.
    const int m = static_cast<int>(fd.gamma.size());
    if (fd.B.rows == 0 && m > 0) fd.B = Matrix(m, p);
    if (fd.D.rows == 0 && m > 0) fd.D = Matrix(m, q - fd.dim);
    fd.alpha0 = read_vec(field(f, "alpha0"), "alpha0");
    fd.alpha_x = read_mat(field(f, "alphaX"), p, "alphaX");
    fd.alpha_y = read_mat(field(f, "alphaY"), q - fd.dim, "alphaY");
    if (fd.alpha_x.rows == 0 && fd.dim > 0) fd.alpha_x = Matrix(fd.dim, p);
    if (fd.alpha_y.rows == 0 && fd.dim > 0) fd.alpha_y = Matrix(fd.dim, q - fd.dim);
    fd.beta = read_vec(field(f, "beta"), "beta");
    if (fd.beta.empty()) fd.beta.assign(fd.dim, 0.0);
    s.followers.push_back(std::move(fd));
  }
  s.objective.cy = read_vec(field(L, "cy"), "leader.cy");
  if (s.objective.cy.empty()) s.objective.cy.assign(q, 0.0);

  for (const auto& c : field(j, "cardinality")) {
    CardinalityConstraint cc;
    for (const auto& idx : field(c, "indices")) {
      if (!idx.is_array() || idx.size() != 2) {
        throw std::runtime_error("cardinality indices must be [follower, coord] pairs");
      }
      cc.indices.push_back({idx[0].get<int>(), idx[1].get<int>()});
    }
    cc.bound = field(c, "K").get<int>();
    s.cardinality.push_back(std::move(cc));
  }
  const Json& mode = field(j, "mode");
  const std::string m = mode.is_null() ? "upper" : mode.get<std::string>();
  if (m == "upper") s.mode = CardinalityMode::Upper;
  else if (m == "mixed") s.mode = CardinalityMode::Mixed;
  else throw std::runtime_error("mode must be \"upper\" or \"mixed\"");
  return s;
}

Json to_json(const SingleLevelProblem& p) {
  Json j;
  j["provenance"] = to_string(p.provenance);
  Json vars = Json::array();
  for (const auto& v : p.vars) {
    vars.push_back({{"name", v.name},
                    {"role", to_string(v.role)},
                    {"lower", number(v.lower)},
                    {"upper", number(v.upper)},
                    {"binary", v.binary}});
  }
  j["vars"] = vars;
  Json rows = Json::array();
  for (const auto& r : p.rows) {
    rows.push_back({{"name", r.name},
                    {"terms", terms_json(r.terms)},
                    {"rel", relation_name(r.rel)},
                    {"rhs", r.rhs}});
  }
  j["rows"] = rows;
  Json pairs = Json::array();
  for (const auto& pr : p.pairs) {
    pairs.push_back({{"name", pr.name},
                     {"a", {{"terms", terms_json(pr.a.terms)}, {"constant", pr.a.constant}}},
                     {"b", {{"terms", terms_json(pr.b.terms)}, {"constant", pr.b.constant}}}});
  }
  j["pairs"] = pairs;
  Json bil = Json::array();
  for (const auto& b : p.bilinear) {
    bil.push_back({{"row", b.row}, {"a", b.var_a}, {"b", b.var_b}, {"coef", b.coef}});
  }
  j["bilinear"] = bil;
  Json quad = Json::array();
  for (const auto& q : p.objective.quad) {
    quad.push_back({{"weight", q.weight}, {"terms", terms_json(q.terms)}});
  }
  j["objective"] = {{"sense", sense_name(p.objective.sense)},
                    {"linear", terms_json(p.objective.linear)},
                    {"constant", p.objective.constant},
                    {"quad", quad}};
  if (p.equilibrium) {
    j["equilibrium"] = {{"x", p.equilibrium->x_vars},
                        {"y", p.equilibrium->y_vars},
                        {"u", p.equilibrium->u_vars}};
  }
  return j;
}

Json to_json(const Solution& s, bool include_time) {
  Json j;
  j["status"] = to_string(s.status);
  j["objective"] = number(s.objective);
  j["bound"] = number(s.bound);
  j["gap"] = number(s.gap);
  j["nodes"] = s.nodes;
  if (include_time) j["wall_time"] = s.wall_time;
  Json values = Json::object();
  for (std::size_t k = 0; k < s.names.size() && k < s.values.size(); ++k) {
    values[s.names[k]] = number(s.values[k]);
  }
  j["values"] = values;
  return j;
}

Solution solution_from_json(const Json& j) {
  Solution s;
  const std::string st = field(j, "status").get<std::string>();
  if (st == "Optimal") s.status = SolveStatus::Optimal;
  else if (st == "Infeasible") s.status = SolveStatus::Infeasible;
  else if (st == "Unbounded") s.status = SolveStatus::Unbounded;
  else if (st == "TimeLimit") s.status = SolveStatus::TimeLimit;
  else throw std::runtime_error("unknown solution status \"" + st + "\"");
  s.objective = read_number(field(j, "objective"), kInf);
  s.bound = read_number(field(j, "bound"), -kInf);
  s.gap = read_number(field(j, "gap"), kInf);
  if (j.contains("nodes")) s.nodes = j["nodes"].get<long>();
  if (j.contains("wall_time")) s.wall_time = j["wall_time"].get<double>();
  for (const auto& [name, v] : field(j, "values").items()) {
    s.names.push_back(name);
    s.values.push_back(read_number(v, std::numeric_limits<double>::quiet_NaN()));
  }
  return s;
}

Json to_json(const gnep::EquilibriumReport& r) {
  Json fs = Json::array();
  for (const auto& f : r.followers) {
    fs.push_back({{"follower", f.index},
                  {"residual", number(f.residual)},
                  {"code", f.code},
                  {"message", f.message}});
  }
  return {{"pass", r.pass}, {"max_residual", number(r.max_residual)}, {"tol", r.tol},
          {"followers", fs}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("error writing " + path);
}

}  // namespace slmf::io
