#include "slmf/reformulation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace slmf {

const char* to_string(ReformulationKind k) {
  switch (k) {
    case ReformulationKind::CardRef: return "CardRef";
    case ReformulationKind::UpperMPCC: return "UpperMPCC";
    case ReformulationKind::MixedMPCC: return "MixedMPCC";
    case ReformulationKind::MixedFinal: return "MixedFinal";
  }
  return "UpperMPCC";
}

namespace {

std::string name2(const char* base, int i, int k) {
  return std::string(base) + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
}

// Accumulates coefficients so repeated variables merge into one term.
class TermSum {
 public:
  void add(int var, double coef) {
    if (coef != 0.0) sum_[var] += coef;
  }
  std::vector<Term> terms() const {
    std::vector<Term> out;
    for (const auto& [v, c] : sum_) {
      if (c != 0.0) out.push_back({v, c});
    }
    return out;
  }

 private:
  std::map<int, double> sum_;
};

class Builder {
 public:
  Builder(const GameSpec& spec, Provenance prov) : spec_(spec) {
    require_valid(spec);
    prob_.provenance = prov;
    const int p = spec.leader_dim();
    for (int j = 0; j < p; ++j) {
      const bool bin = spec.leader.binary[j];
      prob_.game.x.push_back(prob_.add_var({"x[" + std::to_string(j) + "]", VarRole::X,
                                            spec.leader.lower[j], spec.leader.upper[j], bin}));
    }
    for (int i = 0; i < spec.num_followers(); ++i) {
      for (int k = 0; k < spec.followers[i].dim; ++k) {
        prob_.game.y.push_back(prob_.add_var({name2("y", i, k), VarRole::Y, -kInf, kInf, false}));
      }
    }
    for (int r = 0; r < spec.leader.A.rows; ++r) {
      TermSum t;
      for (int j = 0; j < p; ++j) t.add(prob_.game.x[j], spec.leader.A(r, j));
      prob_.rows.push_back({"leader[" + std::to_string(r) + "]", t.terms(), Relation::LessEqual,
                            spec.leader.b[r]});
    }
    auto& obj = prob_.objective;
    obj.sense = spec.objective.sense;
    TermSum lin;
    for (int j = 0; j < p; ++j) lin.add(prob_.game.x[j], spec.objective.cx[j]);
    for (int k = 0; k < spec.follower_total(); ++k) lin.add(prob_.game.y[k], spec.objective.cy[k]);
    obj.linear = lin.terms();
    for (const auto& q : spec.objective.quad) {
      TermSum d;
      for (int j = 0; j < p; ++j) d.add(prob_.game.x[j], q.direction[j]);
      for (int k = 0; k < spec.follower_total(); ++k) d.add(prob_.game.y[k], q.direction[p + k]);
      obj.quad.push_back({q.weight, d.terms()});
    }
  }

  // u for every coordinate (all = true) or only for coordinates covered by a
  // cardinality set.
  void add_u(bool all, bool binary) {
    const int q = spec_.follower_total();
    std::vector<bool> covered(q, all);
    for (const auto& c : spec_.cardinality) {
      for (const auto& r : c.indices) covered[spec_.flat_index(r)] = true;
    }
    prob_.game.u.assign(q, -1);
    for (int i = 0; i < spec_.num_followers(); ++i) {
      for (int k = 0; k < spec_.followers[i].dim; ++k) {
        const int f = spec_.offset(i) + k;
        if (!covered[f]) continue;
        prob_.game.u[f] = prob_.add_var({name2("u", i, k), VarRole::U, 0.0, 1.0, binary});
      }
    }
    for (std::size_t l = 0; l < spec_.cardinality.size(); ++l) {
      const auto& c = spec_.cardinality[l];
      TermSum t;
      for (const auto& r : c.indices) t.add(prob_.game.u[spec_.flat_index(r)], 1.0);
      const double rhs = static_cast<double>(c.indices.size()) - c.bound;
      prob_.rows.push_back({"card[" + std::to_string(l) + "]", t.terms(), Relation::GreaterEqual, rhs});
    }
    for (int i = 0; i < spec_.num_followers(); ++i) {
      for (int k = 0; k < spec_.followers[i].dim; ++k) {
        const int f = spec_.offset(i) + k;
        if (prob_.game.u[f] < 0) continue;
        prob_.pairs.push_back({name2("uy", i, k), AffineExpr::variable(prob_.game.u[f]),
                               AffineExpr::variable(prob_.game.y[f])});
      }
    }
  }

  // Primal feasibility through slacks, lambda-slack pairs and stationarity.
  // extra: 0 none, 1 eta, 2 nu .* u (bilinear).
  void add_kkt(int extra) {
    const int p = spec_.leader_dim();
    const int q = spec_.follower_total();
    for (int i = 0; i < spec_.num_followers(); ++i) {
      const auto& f = spec_.followers[i];
      const int off = spec_.offset(i);
      auto other = [&](int l) { return prob_.game.y[l < off ? l : l + f.dim]; };
      std::vector<int> lambda(f.num_constraints());
      for (int r = 0; r < f.num_constraints(); ++r) {
        const int s = prob_.add_var({name2("s", i, r), VarRole::Aux, 0.0, kInf, false});
        lambda[r] = prob_.add_var({name2("lambda", i, r), VarRole::Lambda, 0.0, kInf, false});
        TermSum t;
        for (int j = 0; j < p; ++j) t.add(prob_.game.x[j], f.B(r, j));
        for (int k = 0; k < f.dim; ++k) t.add(prob_.game.y[off + k], f.C(r, k));
        for (int l = 0; l < q - f.dim; ++l) t.add(other(l), f.D(r, l));
        t.add(s, 1.0);
        prob_.rows.push_back({name2("g", i, r), t.terms(), Relation::Equal, f.gamma[r]});
        prob_.pairs.push_back({name2("cs", i, r), AffineExpr::variable(lambda[r]),
                               AffineExpr::variable(s)});
      }
      const double sg = sense_sign(f.sense);
      for (int k = 0; k < f.dim; ++k) {
        TermSum t;
        for (int j = 0; j < p; ++j) t.add(prob_.game.x[j], sg * f.alpha_x(k, j));
        for (int l = 0; l < q - f.dim; ++l) t.add(other(l), sg * f.alpha_y(k, l));
        t.add(prob_.game.y[off + k], sg * 2.0 * f.beta[k]);
        for (int r = 0; r < f.num_constraints(); ++r) t.add(lambda[r], f.C(r, k));
        const int row = static_cast<int>(prob_.rows.size());
        if (extra == 1) {
          const int eta = prob_.add_var({name2("eta", i, k), VarRole::Eta, -kInf, kInf, false});
          t.add(eta, 1.0);
          const int u = prob_.game.u[off + k];
          prob_.pairs.push_back({name2("eu", i, k), AffineExpr::variable(eta),
                                 AffineExpr{{{u, -1.0}}, 1.0}});
        } else if (extra == 2) {
          const int nu = prob_.add_var({name2("nu", i, k), VarRole::Nu, -kInf, kInf, false});
          prob_.bilinear.push_back({row, nu, prob_.game.u[off + k], 1.0});
        }
        prob_.rows.push_back({name2("stat", i, k), t.terms(), Relation::Equal, -sg * f.alpha0[k]});
      }
    }
  }

  void attach_descriptor() {
    EquilibriumDescriptor d;
    d.x_vars = prob_.game.x;
    d.y_vars = prob_.game.y;
    d.u_vars = prob_.game.u;
    prob_.equilibrium = d;
  }

  SingleLevelProblem take() { return std::move(prob_); }

 private:
  const GameSpec& spec_;
  SingleLevelProblem prob_;
};

void require_mode(const GameSpec& spec, CardinalityMode mode, const char* what) {
  if (spec.mode != mode) {
    throw std::invalid_argument(std::string(what) + " requires the " +
                                (mode == CardinalityMode::Upper ? "upper" : "mixed") +
                                " cardinality mode");
  }
}

}  // namespace

SingleLevelProblem card_to_complementarity(int n, int K, bool binary_u) {
  if (n < 0 || K < 0 || K > n) {
    throw std::invalid_argument("card_to_complementarity needs 0 <= K <= n, got n=" +
                                std::to_string(n) + " K=" + std::to_string(K));
  }
  SingleLevelProblem p;
  p.provenance = Provenance::CardRef;
  for (int j = 0; j < n; ++j) {
    p.game.y.push_back(p.add_var({"z[" + std::to_string(j) + "]", VarRole::Y, -kInf, kInf, false}));
  }
  Row card{"card", {}, Relation::GreaterEqual, static_cast<double>(n - K)};
  for (int j = 0; j < n; ++j) {
    const int u = p.add_var({"u[" + std::to_string(j) + "]", VarRole::U, 0.0, 1.0, binary_u});
    p.game.u.push_back(u);
    card.terms.push_back({u, 1.0});
    p.pairs.push_back({"uz[" + std::to_string(j) + "]", AffineExpr::variable(u),
                       AffineExpr::variable(p.game.y[j])});
  }
  p.rows.push_back(std::move(card));
  return p;
}

SingleLevelProblem build_card_ref(const GameSpec& spec, const ReformulationOptions& opt) {
  require_mode(spec, CardinalityMode::Upper, "CardRef");
  Builder b(spec, Provenance::CardRef);
  b.add_u(false, opt.binary_u);
  b.attach_descriptor();
  return b.take();
}

SingleLevelProblem build_upper_mpcc(const GameSpec& spec, const ReformulationOptions& opt) {
  require_mode(spec, CardinalityMode::Upper, "UpperMPCC");
  Builder b(spec, Provenance::UpperMPCC);
  b.add_u(false, opt.binary_u);
  b.add_kkt(0);
  return b.take();
}

SingleLevelProblem build_mixed_mpcc(const GameSpec& spec) {
  require_mode(spec, CardinalityMode::Mixed, "MixedMPCC");
  Builder b(spec, Provenance::MixedMPCC);
  b.add_u(true, false);
  b.add_kkt(2);
  return b.take();
}

SingleLevelProblem build_mixed_final(const GameSpec& spec) {
  require_mode(spec, CardinalityMode::Mixed, "MixedFinal");
  Builder b(spec, Provenance::MixedFinal);
  b.add_u(true, true);
  b.add_kkt(1);
  return b.take();
}

SingleLevelProblem build(const GameSpec& spec, ReformulationKind kind,
                         const ReformulationOptions& opt) {
  switch (kind) {
    case ReformulationKind::CardRef: return build_card_ref(spec, opt);
    case ReformulationKind::UpperMPCC: return build_upper_mpcc(spec, opt);
    case ReformulationKind::MixedMPCC: return build_mixed_mpcc(spec);
    case ReformulationKind::MixedFinal: return build_mixed_final(spec);
  }
  throw std::invalid_argument("unknown reformulation");
}

std::vector<int> normalize_u(std::span<const double> u, double zero_tol) {
  std::vector<int> out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(u[k] >= -zero_tol && u[k] <= 1.0 + zero_tol)) {
      throw std::invalid_argument("normalize_u: entry " + std::to_string(k) + " outside [0, 1]");
    }
    out[k] = std::abs(u[k]) <= zero_tol ? 0 : 1;
  }
  return out;
}

GamePoint extract_point(const SingleLevelProblem& problem, std::span<const double> values) {
  if (values.size() < static_cast<std::size_t>(problem.num_vars())) {
    throw std::invalid_argument("extract_point: value vector shorter than the variable table");
  }
  GamePoint pt;
  for (int v : problem.game.x) pt.x.push_back(values[v]);
  for (int v : problem.game.y) pt.y.push_back(values[v]);
  if (!problem.game.u.empty()) {
    for (int v : problem.game.u) pt.u.push_back(v >= 0 ? values[v] : 0.0);
  }
  return pt;
}

Vector eta_from_nu(std::span<const double> nu, std::span<const double> u) {
  Vector eta(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) eta[k] = nu[k] * u[k];
  return eta;
}

Vector nu_from_eta(std::span<const double> eta, std::span<const double> u) {
  Vector nu(eta.size(), 0.0);
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (u[k] > 0.0) nu[k] = eta[k] / u[k];
  }
  return nu;
}

bool admissible_u(const GameSpec& spec, std::span<const double> u, double tol) {
  for (const auto& c : spec.cardinality) {
    double sum = 0.0;
    for (const auto& r : c.indices) sum += u[spec.flat_index(r)];
    if (sum < static_cast<double>(c.indices.size()) - c.bound - tol) return false;
  }
  return true;
}

}  // namespace slmf
