#include "slmf/problem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace slmf {

const char* to_string(VarRole r) {
  switch (r) {
    case VarRole::X: return "x";
    case VarRole::Y: return "y";
    case VarRole::U: return "u";
    case VarRole::Lambda: return "lambda";
    case VarRole::Eta: return "eta";
    case VarRole::Nu: return "nu";
    case VarRole::Aux: return "aux";
  }
  return "aux";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::CardRef: return "CardRef";
    case Provenance::UpperMPCC: return "UpperMPCC";
    case Provenance::MixedMPCC: return "MixedMPCC";
    case Provenance::MixedFinal: return "MixedFinal";
    case Provenance::PuSub: return "PuSub";
  }
  return "UpperMPCC";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::TimeLimit: return "TimeLimit";
  }
  return "Infeasible";
}

double Solution::value(const std::string& name) const {
  for (std::size_t k = 0; k < names.size() && k < values.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double AffineExpr::eval(const std::vector<double>& values) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * values[t.var];
  return v;
}

int SingleLevelProblem::add_var(Variable v) {
  vars.push_back(std::move(v));
  return num_vars() - 1;
}

int SingleLevelProblem::find(const std::string& name) const {
  for (int j = 0; j < num_vars(); ++j) {
    if (vars[j].name == name) return j;
  }
  return -1;
}

std::vector<int> SingleLevelProblem::vars_with_role(VarRole role) const {
  std::vector<int> out;
  for (int j = 0; j < num_vars(); ++j) {
    if (vars[j].role == role) out.push_back(j);
  }
  return out;
}

FeasibilityReport check_feasibility(const SingleLevelProblem& problem,
                                    const std::vector<double>& values, double tol) {
  FeasibilityReport r;
  for (int j = 0; j < problem.num_vars(); ++j) {
    const auto& v = problem.vars[j];
    const double x = values[j];
    r.max_bound_violation = std::max({r.max_bound_violation, v.lower - x, x - v.upper});
    if (v.binary) {
      r.max_integrality_violation =
          std::max(r.max_integrality_violation, std::min(std::abs(x), std::abs(1.0 - x)));
    }
  }
  std::vector<double> lhs(problem.rows.size(), 0.0);
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    for (const auto& t : problem.rows[i].terms) lhs[i] += t.coef * values[t.var];
  }
  for (const auto& b : problem.bilinear) lhs[b.row] += b.coef * values[b.var_a] * values[b.var_b];
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    const auto& row = problem.rows[i];
    const double scale = std::max(1.0, std::abs(row.rhs));
    double viol = 0.0;
    switch (row.rel) {
      case Relation::LessEqual: viol = lhs[i] - row.rhs; break;
      case Relation::GreaterEqual: viol = row.rhs - lhs[i]; break;
      case Relation::Equal: viol = std::abs(lhs[i] - row.rhs); break;
    }
    r.max_row_violation = std::max(r.max_row_violation, viol / scale);
  }
  for (const auto& p : problem.pairs) {
    const double a = std::abs(p.a.eval(values));
    const double b = std::abs(p.b.eval(values));
    r.max_pair_violation = std::max(r.max_pair_violation, std::min(a, b));
  }
  r.ok = r.max_bound_violation <= tol && r.max_row_violation <= tol &&
         r.max_pair_violation <= tol && r.max_integrality_violation <= tol;
  return r;
}

double objective_value(const SingleLevelProblem& problem, const std::vector<double>& values) {
  const auto& obj = problem.objective;
  double lin = obj.constant;
  for (const auto& t : obj.linear) lin += t.coef * values[t.var];
  double quad = 0.0;
  for (const auto& q : obj.quad) {
    double d = 0.0;
    for (const auto& t : q.terms) d += t.coef * values[t.var];
    quad += q.weight * d * d;
  }
  return lin + sense_sign(obj.sense) * quad;
}

namespace {

void write_terms(std::ostream& os, const SingleLevelProblem& p, const std::vector<Term>& terms) {
  if (terms.empty()) {
    os << "0";
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    if (!first) os << (t.coef < 0 ? " - " : " + ");
    else if (t.coef < 0) os << "-";
    first = false;
    const double c = std::abs(t.coef);
    if (c != 1.0) os << c << " ";
    os << p.vars[t.var].name;
  }
}

void write_expr(std::ostream& os, const SingleLevelProblem& p, const AffineExpr& e) {
  os << "(";
  write_terms(os, p, e.terms);
  if (e.constant != 0.0) os << (e.constant < 0 ? " - " : " + ") << std::abs(e.constant);
  os << ")";
}

}  // namespace

void write_lp_text(std::ostream& os, const SingleLevelProblem& p) {
  os << std::setprecision(12);
  os << "\\ provenance " << to_string(p.provenance) << "\n";
  os << (p.objective.sense == Sense::Minimize ? "MINIMIZE" : "MAXIMIZE") << "\n  obj: ";
  write_terms(os, p, p.objective.linear);
  if (p.objective.constant != 0.0) os << " + " << p.objective.constant;
  for (const auto& q : p.objective.quad) {
    os << (p.objective.sense == Sense::Minimize ? " + " : " - ") << q.weight << " [ ";
    write_terms(os, p, q.terms);
    os << " ]^2";
  }
  os << "\nSUBJECT TO\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    os << "  " << r.name << ": ";
    write_terms(os, p, r.terms);
    for (const auto& b : p.bilinear) {
      if (b.row == static_cast<int>(i)) {
        os << (b.coef < 0 ? " - " : " + ") << std::abs(b.coef) << " " << p.vars[b.var_a].name
           << " * " << p.vars[b.var_b].name;
      }
    }
    os << (r.rel == Relation::LessEqual ? " <= " : r.rel == Relation::Equal ? " = " : " >= ")
       << r.rhs << "\n";
  }
  for (const auto& pr : p.pairs) {
    os << "  PAIR " << pr.name << ": ";
    write_expr(os, p, pr.a);
    os << " * ";
    write_expr(os, p, pr.b);
    os << " = 0\n";
  }
  os << "BOUNDS\n";
  for (const auto& v : p.vars) {
    os << "  ";
    if (v.lower == -kInf && v.upper == kInf) {
      os << v.name << " free\n";
      continue;
    }
    os << (v.lower == -kInf ? std::string("-inf") : std::to_string(v.lower)) << " <= " << v.name
       << " <= " << (v.upper == kInf ? std::string("+inf") : std::to_string(v.upper)) << "\n";
  }
  bool any_bin = false;
  for (const auto& v : p.vars) any_bin |= v.binary;
  if (any_bin) {
    os << "BIN\n";
    for (const auto& v : p.vars) {
      if (v.binary) os << "  " << v.name << "\n";
    }
  }
  os << "END\n";
}

}  // namespace slmf
