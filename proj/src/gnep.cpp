#include "slmf/gnep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slmf/rng.hpp"

namespace slmf::gnep {

const char* to_string(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::Optimal: return "Optimal";
    case ResponseStatus::Infeasible: return "Infeasible";
    case ResponseStatus::Unbounded: return "Unbounded";
    case ResponseStatus::Failed: return "Failed";
  }
  return "Failed";
}

namespace {

void check_dims(const GameSpec& spec, std::span<const double> x, std::span<const double> u) {
  if (x.size() != static_cast<std::size_t>(spec.leader_dim())) {
    throw std::invalid_argument("x has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(spec.leader_dim()));
  }
  if (!u.empty() && u.size() != static_cast<std::size_t>(spec.follower_total())) {
    throw std::invalid_argument("u has length " + std::to_string(u.size()) + ", expected " +
                                std::to_string(spec.follower_total()));
  }
}

bool interdicted(std::span<const double> u, int flat) { return !u.empty() && u[flat] >= 0.5; }

// Position of joint coordinate `flat` inside y_{-i}.
int minus_index(const GameSpec& spec, int i, int flat) {
  const int off = spec.offset(i);
  return flat < off ? flat : flat - spec.followers[i].dim;
}

ResponseStatus from_convex(kernel::ConvexStatus s) {
  switch (s) {
    case kernel::ConvexStatus::Optimal: return ResponseStatus::Optimal;
    case kernel::ConvexStatus::Infeasible: return ResponseStatus::Infeasible;
    case kernel::ConvexStatus::Unbounded: return ResponseStatus::Unbounded;
    default: return ResponseStatus::Failed;
  }
}

}  // namespace

BestResponse best_response(const GameSpec& spec, int i, std::span<const double> x,
                           std::span<const double> u, std::span<const double> y_minus_i) {
  check_dims(spec, x, u);
  if (i < 0 || i >= spec.num_followers()) throw std::invalid_argument("follower index out of range");
  const auto& f = spec.followers[i];
  const int q = spec.follower_total();
  if (y_minus_i.size() != static_cast<std::size_t>(q - f.dim)) {
    throw std::invalid_argument("y_{-i} has the wrong length");
  }
  const double sg = sense_sign(f.sense);
  const Vector alpha = follower_alpha(spec, i, x, y_minus_i);
  kernel::LpProblem lp;
  std::vector<kernel::ConvexTerm> terms;
  const int off = spec.offset(i);
  for (int k = 0; k < f.dim; ++k) {
    const bool fixed = interdicted(u, off + k);
    lp.add_var(sg * alpha[k], fixed ? 0.0 : -kInf, fixed ? 0.0 : kInf);
    if (sg * f.beta[k] > 0.0) terms.push_back({sg * f.beta[k], {{k, 1.0}}});
  }
  for (int r = 0; r < f.num_constraints(); ++r) {
    kernel::LpRow row;
    double rhs = f.gamma[r];
    for (int j = 0; j < spec.leader_dim(); ++j) rhs -= f.B(r, j) * x[j];
    for (int l = 0; l < q - f.dim; ++l) rhs -= f.D(r, l) * y_minus_i[l];
    for (int k = 0; k < f.dim; ++k) {
      if (f.C(r, k) != 0.0) row.terms.push_back({k, f.C(r, k)});
    }
    row.rel = Relation::LessEqual;
    row.rhs = rhs;
    lp.rows.push_back(std::move(row));
  }
  kernel::ConvexOptions opt;
  opt.polish = true;
  opt.lp.parallel = false;
  const kernel::ConvexResult res = kernel::solve_convex(lp, terms, opt);
  BestResponse br;
  br.status = from_convex(res.status);
  if (res.status == kernel::ConvexStatus::NotConverged && !res.primal.empty()) {
    br.status = ResponseStatus::Optimal;  // best point found; residuals expose any shortfall
  }
  if (br.status != ResponseStatus::Optimal) return br;
  br.y = res.primal;
  br.value = 0.0;
  for (int k = 0; k < f.dim; ++k) br.value += alpha[k] * br.y[k] + f.beta[k] * br.y[k] * br.y[k];
  return br;
}

bool has_exact_potential(const GameSpec& spec, double tol) {
  for (const auto& f : spec.followers) {
    for (double d : f.D.data) {
      if (d != 0.0) return false;
    }
  }
  for (int i = 0; i < spec.num_followers(); ++i) {
    const auto& fi = spec.followers[i];
    const double si = sense_sign(fi.sense);
    for (int j = 0; j < spec.num_followers(); ++j) {
      if (j == i) continue;
      const auto& fj = spec.followers[j];
      const double sj = sense_sign(fj.sense);
      for (int k = 0; k < fi.dim; ++k) {
        for (int l = 0; l < fj.dim; ++l) {
          const double a = si * fi.alpha_y(k, minus_index(spec, i, spec.offset(j) + l));
          const double b = sj * fj.alpha_y(l, minus_index(spec, j, spec.offset(i) + k));
          if (std::abs(a - b) > tol * std::max(1.0, std::abs(a))) return false;
        }
      }
    }
  }
  return true;
}

namespace {

// Minimizes the joint potential
//   sum_i sign_i (alpha0_i + alphaX_i x)^T y_i + 1/2 y^T H y
// with H = diag(2 sign_i beta_i) + sign_i alphaY_i blocks, written as a sum
// of squares through the eigen-decomposition of H.
bool potential_equilibrium(const GameSpec& spec, std::span<const double> x,
                           std::span<const double> u, Vector& y) {
  const int q = spec.follower_total();
  const int p = spec.leader_dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(q, q);
  kernel::LpProblem lp;
  for (int i = 0; i < spec.num_followers(); ++i) {
    const auto& f = spec.followers[i];
    const double sg = sense_sign(f.sense);
    const int off = spec.offset(i);
    for (int k = 0; k < f.dim; ++k) {
      double c = f.alpha0[k];
      for (int j = 0; j < p; ++j) c += f.alpha_x(k, j) * x[j];
      const bool fixed = interdicted(u, off + k);
      lp.add_var(sg * c, fixed ? 0.0 : -kInf, fixed ? 0.0 : kInf);
      H(off + k, off + k) = 2.0 * sg * f.beta[k];
      for (int l = 0; l < q; ++l) {
        if (l >= off && l < off + f.dim) continue;
        H(off + k, l) = sg * f.alpha_y(k, minus_index(spec, i, l));
      }
    }
    for (int r = 0; r < f.num_constraints(); ++r) {
      kernel::LpRow row;
      double rhs = f.gamma[r];
      for (int j = 0; j < p; ++j) rhs -= f.B(r, j) * x[j];
      for (int k = 0; k < f.dim; ++k) {
        if (f.C(r, k) != 0.0) row.terms.push_back({off + k, f.C(r, k)});
      }
      row.rhs = rhs;
      lp.rows.push_back(std::move(row));
    }
  }
  H = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  if (eig.info() != Eigen::Success) return false;
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double scale = q > 0 ? std::max(1.0, lam.cwiseAbs().maxCoeff()) : 1.0;
  if (q > 0 && lam.minCoeff() < -1e-10 * scale) return false;
  std::vector<kernel::ConvexTerm> terms;
  for (int k = 0; k < q; ++k) {
    if (lam(k) <= 1e-13 * scale) continue;
    kernel::ConvexTerm t;
    t.weight = 0.5 * lam(k);
    for (int l = 0; l < q; ++l) {
      const double v = eig.eigenvectors()(l, k);
      if (std::abs(v) > 1e-15) t.direction.push_back({l, v});
    }
    terms.push_back(std::move(t));
  }
  kernel::ConvexOptions opt;
  opt.polish = true;
  opt.lp.parallel = false;
  opt.max_iterations = 1000;
  const kernel::ConvexResult res = kernel::solve_convex(lp, terms, opt);
  if (res.primal.empty() || (res.status != kernel::ConvexStatus::Optimal &&
                             res.status != kernel::ConvexStatus::NotConverged)) {
    return false;
  }
  y = res.primal;
  return true;
}

bool iterate(const GameSpec& spec, std::span<const double> x, std::span<const double> u,
             const EquilibriumConfig& cfg, Vector& y, int& iterations) {
  auto respond = [&](int i, Vector& out) {
    const Vector ym = others(spec, i, y);
    const BestResponse br = best_response(spec, i, x, u, ym);
    if (br.status != ResponseStatus::Optimal) return false;
    out = br.y;
    return true;
  };
  // One undamped Gauss-Seidel sweep makes every block feasible.
  for (int i = 0; i < spec.num_followers(); ++i) {
    Vector br;
    if (!respond(i, br)) return false;
    std::copy(br.begin(), br.end(), y.begin() + spec.offset(i));
  }
  for (iterations = 1; iterations <= cfg.max_iterations; ++iterations) {
    double change = 0.0;
    for (int i = 0; i < spec.num_followers(); ++i) {
      Vector br;
      if (!respond(i, br)) return false;
      const int off = spec.offset(i);
      for (std::size_t k = 0; k < br.size(); ++k) {
        const double next = y[off + k] + cfg.damping * (br[k] - y[off + k]);
        change = std::max(change, std::abs(next - y[off + k]));
        y[off + k] = next;
      }
    }
    if (change <= cfg.step_tol) return true;
  }
  return false;
}

}  // namespace

EquilibriumResult find_equilibrium(const GameSpec& spec, std::span<const double> x,
                                   std::span<const double> u, const EquilibriumConfig& config) {
  check_dims(spec, x, u);
  EquilibriumResult out;
  const int q = spec.follower_total();
  const bool potential = has_exact_potential(spec);
  if (config.method != Method::BestResponse && potential) {
    Vector y;
    if (potential_equilibrium(spec, x, u, y)) {
      const EquilibriumReport rep = verify_equilibrium(spec, x, u, y, config.tol);
      if (rep.pass) {
        out.found = true;
        out.y = std::move(y);
        out.method = "potential";
        out.max_residual = rep.max_residual;
        return out;
      }
    }
  }
  if (config.method == Method::Potential) return out;

  Rng rng(config.seed, Rng::kStreamEquilibrium);
  std::vector<Vector> starts;
  starts.emplace_back(q, 0.0);
  Vector uniform(q, 0.0);
  for (int i = 0; i < spec.num_followers(); ++i) {
    for (int k = 0; k < spec.followers[i].dim; ++k) {
      uniform[spec.offset(i) + k] = 1.0 / spec.followers[i].dim;
    }
  }
  starts.push_back(uniform);
  Vector random(q);
  for (double& v : random) v = rng.uniform();
  starts.push_back(random);
  for (const Vector& s : starts) {
    Vector y = s;
    int iters = 0;
    if (!iterate(spec, x, u, config, y, iters)) continue;
    const EquilibriumReport rep = verify_equilibrium(spec, x, u, y, config.tol);
    if (rep.pass) {
      out.found = true;
      out.y = std::move(y);
      out.method = "best-response";
      out.iterations = iters;
      out.max_residual = rep.max_residual;
      return out;
    }
  }
  return out;
}

EquilibriumReport verify_equilibrium(const GameSpec& spec, std::span<const double> x,
                                     std::span<const double> u, std::span<const double> y,
                                     double tol) {
  check_dims(spec, x, u);
  if (y.size() != static_cast<std::size_t>(spec.follower_total())) {
    throw std::invalid_argument("y has length " + std::to_string(y.size()) + ", expected " +
                                std::to_string(spec.follower_total()));
  }
  EquilibriumReport rep;
  rep.tol = tol;
  rep.followers.resize(spec.num_followers());
#pragma omp parallel for schedule(dynamic) if (spec.num_followers() > 4)
  for (int i = 0; i < spec.num_followers(); ++i) {
    const auto& f = spec.followers[i];
    FollowerResidual& r = rep.followers[i];
    r.index = i;
    r.code = "OK";
    const Vector g = follower_constraints(spec, i, x, y);
    for (int k = 0; k < f.num_constraints(); ++k) {
      if (g[k] > tol * std::max(1.0, std::abs(f.gamma[k]))) {
        r.code = "INFEASIBLE_RESPONSE";
        r.message = "constraint " + std::to_string(k) + " violated by " + std::to_string(g[k]);
      }
    }
    const int off = spec.offset(i);
    for (int k = 0; k < f.dim; ++k) {
      if (interdicted(u, off + k) && std::abs(y[off + k]) > tol) {
        r.code = "INFEASIBLE_RESPONSE";
        r.message = "interdicted coordinate " + std::to_string(k) + " is nonzero";
      }
    }
    if (r.code != "OK") {
      r.residual = kInf;
      continue;
    }
    const BestResponse br = best_response(spec, i, x, u, others(spec, i, y));
    if (br.status != ResponseStatus::Optimal) {
      r.code = "BEST_RESPONSE_FAILED";
      r.message = std::string("best response status ") + to_string(br.status);
      r.residual = kInf;
      continue;
    }
    const double sg = sense_sign(f.sense);
    r.residual = sg * (follower_objective(spec, i, x, y) - br.value);
  }
  rep.pass = true;
  for (const auto& r : rep.followers) {
    rep.max_residual = std::max(rep.max_residual, r.residual);
    if (r.code != "OK" || r.residual > tol) rep.pass = false;
  }
  return rep;
}

}  // namespace slmf::gnep
