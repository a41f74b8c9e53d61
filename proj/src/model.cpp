#include "slmf/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace slmf {

int GameSpec::follower_total() const {
  int q = 0;
  for (const auto& f : followers) q += f.dim;
  return q;
}

int GameSpec::offset(int i) const {
  int off = 0;
  for (int j = 0; j < i; ++j) off += followers[j].dim;
  return off;
}

namespace {

bool all_finite(std::span<const double> v) {
  for (double d : v) {
    if (!std::isfinite(d)) return false;
  }
  return true;
}

class Collector {
 public:
  void add(std::string code, std::string message) {
    out_.push_back({std::move(code), std::move(message)});
  }
  void check_shape(const Matrix& m, int rows, int cols, const std::string& what) {
    if (m.rows != rows || m.cols != cols ||
        m.data.size() != static_cast<std::size_t>(rows) * cols) {
      std::ostringstream os;
      os << what << " is " << m.rows << "x" << m.cols << ", expected " << rows << "x" << cols;
      add("DIMENSION_MISMATCH", os.str());
    }
  }
  void check_size(std::size_t got, int want, const std::string& what) {
    if (got != static_cast<std::size_t>(want)) {
      std::ostringstream os;
      os << what << " has length " << got << ", expected " << want;
      add("DIMENSION_MISMATCH", os.str());
    }
  }
  void check_finite(std::span<const double> v, const std::string& what) {
    if (!all_finite(v)) add("NONFINITE_VALUE", what + " contains NaN or infinity");
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate(const GameSpec& spec) {
  Collector c;
  const int p = spec.leader_dim();
  const int q = spec.follower_total();

  if (spec.followers.empty()) c.add("NO_FOLLOWERS", "game has no followers");

  const auto& L = spec.leader;
  c.check_size(L.upper.size(), p, "leader.upper");
  c.check_size(L.binary.size(), p, "leader.binary");
  c.check_shape(L.A, static_cast<int>(L.b.size()), p, "leader.A");
  c.check_finite(L.A.data, "leader.A");
  c.check_finite(L.b, "leader.b");
  for (int k = 0; k < p && k < static_cast<int>(L.upper.size()); ++k) {
    if (std::isnan(L.lower[k]) || std::isnan(L.upper[k]) || L.lower[k] > L.upper[k]) {
      c.add("BOUND_ORDER", "leader bound " + std::to_string(k) + " has lower > upper");
    }
    if (k < static_cast<int>(L.binary.size()) && L.binary[k] &&
        (L.lower[k] < 0.0 || L.upper[k] > 1.0)) {
      c.add("BINARY_BOUNDS", "binary leader coordinate " + std::to_string(k) +
                                 " has bounds outside [0,1]");
    }
  }

  const auto& obj = spec.objective;
  c.check_size(obj.cx.size(), p, "objective.cx");
  c.check_size(obj.cy.size(), q, "objective.cy");
  c.check_finite(obj.cx, "objective.cx");
  c.check_finite(obj.cy, "objective.cy");
  for (std::size_t k = 0; k < obj.quad.size(); ++k) {
    const auto& t = obj.quad[k];
    c.check_size(t.direction.size(), p + q, "objective.quad[" + std::to_string(k) + "]");
    c.check_finite(t.direction, "objective.quad direction");
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
      c.add("QUAD_WEIGHT_NEGATIVE", "quadratic term " + std::to_string(k) +
                                        " has a negative or non-finite weight");
    }
  }

  for (int i = 0; i < spec.num_followers(); ++i) {
    const auto& f = spec.followers[i];
    const std::string tag = "follower " + std::to_string(i);
    const int m = f.num_constraints();
    if (f.dim <= 0) c.add("DIMENSION_MISMATCH", tag + " has non-positive dimension");
    c.check_shape(f.B, m, p, tag + " B");
    c.check_shape(f.C, m, f.dim, tag + " C");
    c.check_shape(f.D, m, q - f.dim, tag + " D");
    c.check_size(f.alpha0.size(), f.dim, tag + " alpha0");
    c.check_shape(f.alpha_x, f.dim, p, tag + " alphaX");
    c.check_shape(f.alpha_y, f.dim, q - f.dim, tag + " alphaY");
    c.check_size(f.beta.size(), f.dim, tag + " beta");
    for (const auto* v : {&f.B.data, &f.C.data, &f.D.data, &f.gamma, &f.alpha0,
                          &f.alpha_x.data, &f.alpha_y.data, &f.beta}) {
      c.check_finite(*v, tag + " data");
    }
    // Convexity in own variables after normalization to minimization.
    const double s = sense_sign(f.sense);
    for (std::size_t j = 0; j < f.beta.size(); ++j) {
      if (s * f.beta[j] < 0.0) {
        c.add("BETA_SIGN", tag + " beta[" + std::to_string(j) +
                               "] makes the objective non-convex in its own variables");
      }
    }
  }

  std::set<std::pair<int, int>> seen;
  for (std::size_t l = 0; l < spec.cardinality.size(); ++l) {
    const auto& cc = spec.cardinality[l];
    const std::string tag = "cardinality " + std::to_string(l);
    if (cc.bound < 0) c.add("CARD_NEGATIVE_BOUND", tag + " has a negative bound");
    std::set<std::pair<int, int>> mine;
    for (const auto& ref : cc.indices) {
      if (ref.follower < 0 || ref.follower >= spec.num_followers() || ref.coord < 0 ||
          ref.coord >= spec.followers[ref.follower].dim) {
        c.add("CARD_INDEX_OUT_OF_RANGE", tag + " references [" + std::to_string(ref.follower) +
                                             "," + std::to_string(ref.coord) + "]");
        continue;
      }
      const auto key = std::make_pair(ref.follower, ref.coord);
      if (!mine.insert(key).second || seen.count(key)) {
        c.add("OVERLAPPING_CARD_SETS", tag + " repeats coordinate [" +
                                           std::to_string(ref.follower) + "," +
                                           std::to_string(ref.coord) + "]");
      }
    }
    seen.insert(mine.begin(), mine.end());
    if (cc.bound > static_cast<int>(cc.indices.size())) {
      c.add("CARD_BOUND_EXCEEDS_SET", tag + " bound exceeds its subset size");
    }
  }
  return c.take();
}

void require_valid(const GameSpec& spec) {
  const auto report = validate(spec);
  if (report.empty()) return;
  std::ostringstream os;
  os << "invalid game:";
  for (const auto& v : report) os << "\n  " << v.code << ": " << v.message;
  throw std::invalid_argument(os.str());
}

namespace {

void require_dims(const GameSpec& spec, int i, std::size_t xs, std::size_t ys) {
  if (i < 0 || i >= spec.num_followers()) throw std::invalid_argument("follower index out of range");
  if (xs != static_cast<std::size_t>(spec.leader_dim()) ||
      ys != static_cast<std::size_t>(spec.follower_total())) {
    throw std::invalid_argument("dimension mismatch between game and (x, y)");
  }
}

}  // namespace

std::span<const double> block(const GameSpec& spec, int i, std::span<const double> y) {
  return y.subspan(spec.offset(i), spec.followers[i].dim);
}

Vector others(const GameSpec& spec, int i, std::span<const double> y) {
  Vector out;
  out.reserve(y.size() - spec.followers[i].dim);
  const int lo = spec.offset(i);
  const int hi = lo + spec.followers[i].dim;
  for (int k = 0; k < static_cast<int>(y.size()); ++k) {
    if (k < lo || k >= hi) out.push_back(y[k]);
  }
  return out;
}

Vector follower_alpha(const GameSpec& spec, int i, std::span<const double> x,
                      std::span<const double> y_minus_i) {
  const auto& f = spec.followers[i];
  if (x.size() != static_cast<std::size_t>(f.alpha_x.cols) ||
      y_minus_i.size() != static_cast<std::size_t>(f.alpha_y.cols)) {
    throw std::invalid_argument("dimension mismatch in follower_alpha");
  }
  Vector a = f.alpha0;
  for (int j = 0; j < f.dim; ++j) {
    for (int k = 0; k < f.alpha_x.cols; ++k) a[j] += f.alpha_x(j, k) * x[k];
    for (int k = 0; k < f.alpha_y.cols; ++k) a[j] += f.alpha_y(j, k) * y_minus_i[k];
  }
  return a;
}

double follower_objective(const GameSpec& spec, int i, std::span<const double> x,
                          std::span<const double> y) {
  require_dims(spec, i, x.size(), y.size());
  const auto& f = spec.followers[i];
  const Vector a = follower_alpha(spec, i, x, others(spec, i, y));
  const auto yi = block(spec, i, y);
  double v = 0.0;
  for (int j = 0; j < f.dim; ++j) v += a[j] * yi[j] + f.beta[j] * yi[j] * yi[j];
  return v;
}

Vector follower_gradient(const GameSpec& spec, int i, std::span<const double> x,
                         std::span<const double> y) {
  require_dims(spec, i, x.size(), y.size());
  const auto& f = spec.followers[i];
  Vector g = follower_alpha(spec, i, x, others(spec, i, y));
  const auto yi = block(spec, i, y);
  for (int j = 0; j < f.dim; ++j) g[j] += 2.0 * f.beta[j] * yi[j];
  return g;
}

Vector follower_constraints(const GameSpec& spec, int i, std::span<const double> x,
                            std::span<const double> y) {
  require_dims(spec, i, x.size(), y.size());
  const auto& f = spec.followers[i];
  const Vector ym = others(spec, i, y);
  const auto yi = block(spec, i, y);
  Vector g(f.num_constraints());
  for (int k = 0; k < f.num_constraints(); ++k) {
    double v = -f.gamma[k];
    for (int j = 0; j < f.B.cols; ++j) v += f.B(k, j) * x[j];
    for (int j = 0; j < f.C.cols; ++j) v += f.C(k, j) * yi[j];
    for (int j = 0; j < f.D.cols; ++j) v += f.D(k, j) * ym[j];
    g[k] = v;
  }
  return g;
}

double leader_objective(const GameSpec& spec, std::span<const double> x,
                        std::span<const double> y) {
  if (x.size() != static_cast<std::size_t>(spec.leader_dim()) ||
      y.size() != static_cast<std::size_t>(spec.follower_total())) {
    throw std::invalid_argument("dimension mismatch in leader_objective");
  }
  const auto& obj = spec.objective;
  double lin = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) lin += obj.cx[k] * x[k];
  for (std::size_t k = 0; k < y.size(); ++k) lin += obj.cy[k] * y[k];
  double quad = 0.0;
  const std::size_t p = x.size();
  for (const auto& t : obj.quad) {
    double d = 0.0;
    for (std::size_t k = 0; k < p; ++k) d += t.direction[k] * x[k];
    for (std::size_t k = 0; k < y.size(); ++k) d += t.direction[p + k] * y[k];
    quad += t.weight * d * d;
  }
  return lin + sense_sign(obj.sense) * quad;
}

}  // namespace slmf
