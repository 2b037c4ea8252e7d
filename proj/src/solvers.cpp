#include "thinhomog/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thinhomog {

namespace {

void finish(SolveResult& r, double cutoff_radius) {
  r.linf_norm = r.solution.size() ? r.solution.cwiseAbs().maxCoeff() : 0.0;
  r.r_bound_ok = r.linf_norm <= cutoff_radius + 1e-12;
}

// Solve J d = rhs; on an indefiniteness signal retry with the (symmetric
// positive) normal equations J^2 d = J rhs.
Vector newton_step_2d(const SparseMatrix& j, const Vector& rhs, const NewtonOptions& opt,
                      bool& used_normal_equations) {
  try {
    return cg_solve(j, rhs, opt.cg_tol, opt.cg_max_iter).x;
  } catch (const IndefiniteOperatorError&) {
    used_normal_equations = true;
    SparseMatrix jj(Eigen::SparseMatrix<double, Eigen::RowMajor>(j.eigen() * j.eigen()));
    return cg_solve(jj, j * rhs, opt.cg_tol, opt.cg_max_iter).x;
  }
}

}  // namespace

SolveResult solve_linear_eps(const ThinMesh& m, double eps, const Vector& rhs,
                             double tol, int max_iter) {
  const SparseMatrix a = assemble_stiffness_aniso(m, eps) + assemble_mass(m);
  const SparseMatrix mass = assemble_mass(m);
  const Vector b = mass * rhs;
  CgResult cg = cg_solve(a, b, tol, max_iter);
  SolveResult r;
  r.solution = std::move(cg.x);
  r.residual_history = {cg.final_residual};
  r.iterations = cg.iterations;
  r.converged = true;
  finish(r, std::numeric_limits<double>::infinity());
  return r;
}

SolveResult newton_eps(const ThinMesh& m, double eps, const Nonlinearity& f,
                       Vector u_init, const NewtonOptions& opt) {
  if (!(opt.tol > 0.0)) throw InvalidArgumentError("newton_eps: tol must be positive");
  const SparseMatrix a = assemble_stiffness_aniso(m, eps) + assemble_mass(m);

  auto residual = [&](const Vector& u) -> Vector {
    return a * u - assemble_strip_load(m, eps, f, u);
  };

  SolveResult r;
  r.solution = std::move(u_init);
  Vector res = residual(r.solution);
  double rnorm = res.norm();
  const double accept = opt.tol * (1.0 + rnorm);
  r.residual_history.push_back(rnorm);

  if (rnorm <= accept) {
    r.converged = true;
    finish(r, f.cutoff_radius);
    return r;
  }

  for (int it = 1; it <= opt.max_newton; ++it) {
    const SparseMatrix j = a - assemble_strip_jacobian(m, eps, f, r.solution);
    const Vector step = newton_step_2d(j, -res, opt, r.used_normal_equations);

    double t = 1.0;
    bool accepted = false;
    Vector u_trial;
    Vector res_trial;
    double rnorm_trial = 0.0;
    for (int ls = 0; ls <= opt.max_halvings; ++ls) {
      u_trial = r.solution + t * step;
      res_trial = residual(u_trial);
      rnorm_trial = res_trial.norm();
      if (std::isfinite(rnorm_trial) && rnorm_trial < rnorm) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw StagnationError("newton_eps: line search stalled", r.residual_history);

    r.solution = std::move(u_trial);
    res = std::move(res_trial);
    rnorm = rnorm_trial;
    r.iterations = it;
    r.residual_history.push_back(rnorm);
    if (rnorm <= accept) {
      r.converged = true;
      finish(r, f.cutoff_radius);
      return r;
    }
  }
  throw NonConvergenceError("newton_eps: max_newton reached", rnorm);
}

namespace {

struct LimitOperator {
  Tridiag k1, m1;
  double f0_scale;

  Vector residual(const Nonlinearity& f, const Vector& u) const {
    Vector fu(u.size());
    for (Index i = 0; i < u.size(); ++i) fu[i] = f0_scale * f.f(u[i]);
    return k1.multiply(u) + m1.multiply(u) - m1.multiply(fu);
  }

  Vector step(const Nonlinearity& f, const Vector& u, const Vector& rhs) const {
    const Index n = u.size();
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = f0_scale * f.df(u[i]);
    Vector diag(n), sub(n - 1), super(n - 1);
    for (Index i = 0; i < n; ++i) diag[i] = k1.diag[i] + m1.diag[i] * (1.0 - w[i]);
    for (Index i = 0; i + 1 < n; ++i) {
      sub[i] = k1.off[i] + m1.off[i] * (1.0 - w[i]);        // row i+1, col i
      super[i] = k1.off[i] + m1.off[i] * (1.0 - w[i + 1]);  // row i, col i+1
    }
    return tridiag_solve(sub, diag, super, rhs);
  }
};

}  // namespace

SolveResult newton_limit(int n, const HomogenizedData& hd, const Nonlinearity& f,
                         Vector u_init, const NewtonOptions& opt) {
  if (!(hd.q0 > 0.0)) throw InvalidArgumentError("newton_limit: q0 must be positive");
  if (u_init.size() != n + 1)
    throw InvalidArgumentError("newton_limit: u_init must have n+1 nodes");

  LimitOperator op;
  auto [k1, m1] = assemble_1d(n, hd.q0);
  op.k1 = std::move(k1);
  op.m1 = std::move(m1);
  op.f0_scale = hd.f0_scale;

  SolveResult r;
  r.solution = std::move(u_init);
  Vector res = op.residual(f, r.solution);
  double rnorm = res.norm();
  const double accept = opt.tol * (1.0 + rnorm);
  r.residual_history.push_back(rnorm);
  if (rnorm <= accept) {
    r.converged = true;
    finish(r, f.cutoff_radius);
    return r;
  }

  for (int it = 1; it <= opt.max_newton; ++it) {
    const Vector step = op.step(f, r.solution, -res);
    double t = 1.0;
    bool accepted = false;
    Vector u_trial;
    Vector res_trial;
    double rnorm_trial = 0.0;
    for (int ls = 0; ls <= opt.max_halvings; ++ls) {
      u_trial = r.solution + t * step;
      res_trial = op.residual(f, u_trial);
      rnorm_trial = res_trial.norm();
      if (std::isfinite(rnorm_trial) && rnorm_trial < rnorm) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw StagnationError("newton_limit: line search stalled", r.residual_history);
    r.solution = std::move(u_trial);
    res = std::move(res_trial);
    rnorm = rnorm_trial;
    r.iterations = it;
    r.residual_history.push_back(rnorm);
    if (rnorm <= accept) {
      r.converged = true;
      finish(r, f.cutoff_radius);
      return r;
    }
  }
  throw NonConvergenceError("newton_limit: max_newton reached", rnorm);
}

bool quadratic_tail_ok(const std::vector<double>& history, double c_bound,
                       double floor) {
  if (history.size() < 2) return false;
  int checked = 0;
  for (std::size_t i = history.size() - 1; i >= 1 && checked < 3; --i) {
    const double prev = history[i - 1];
    if (prev < floor) continue;
    if (history[i] / (prev * prev) > c_bound) return false;
    ++checked;
  }
  return checked >= 1;
}

double field1d_mean(const Vector& u) {
  const Index n = u.size() - 1;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += 0.5 * (u[i] + u[i + 1]);
  return s / static_cast<double>(n);
}

EquilibriaResult find_equilibria_limit(int n, const HomogenizedData& hd,
                                       const Nonlinearity& f, double bound_r,
                                       int multistart, const NewtonOptions& opt) {
  if (multistart < 3)
    throw InvalidArgumentError("find_equilibria_limit: multistart must be >= 3");

  std::vector<Vector> starts;
  Vector perturb(n + 1);
  for (Index i = 0; i <= n; ++i)
    perturb[i] = std::cos(std::numbers::pi * static_cast<double>(i) / n);
  for (int k = 0; k < multistart; ++k) {
    const double c = -bound_r + 2.0 * bound_r * k / (multistart - 1);
    starts.push_back(Vector::Constant(n + 1, c));
    starts.push_back(Vector::Constant(n + 1, c) + 0.1 * perturb);
    starts.push_back(Vector::Constant(n + 1, c) - 0.1 * perturb);
  }

  EquilibriaResult out;
  out.total_starts = static_cast<int>(starts.size());
  for (const Vector& s : starts) {
    SolveResult r;
    try {
      r = newton_limit(n, hd, f, s, opt);
    } catch (const Error&) {
      ++out.failed_starts;
      continue;
    }
    if (r.linf_norm > bound_r + 1e-12) {
      ++out.discarded_out_of_ball;
      continue;
    }
    bool duplicate = false;
    for (const SolveResult& kept : out.equilibria) {
      if ((kept.solution - r.solution).cwiseAbs().maxCoeff() <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.equilibria.push_back(std::move(r));
  }
  std::sort(out.equilibria.begin(), out.equilibria.end(),
            [](const SolveResult& a, const SolveResult& b) {
              return field1d_mean(a.solution) < field1d_mean(b.solution);
            });
  return out;
}

HyperbolicityReport hyperbolicity(const Vector& u0, const HomogenizedData& hd,
                                  const Nonlinearity& f, double gap_tol) {
  const int n = static_cast<int>(u0.size()) - 1;
  auto [k1, m1] = assemble_1d(n, hd.q0);
  Vector w(u0.size());
  for (Index i = 0; i < u0.size(); ++i) w[i] = hd.f0_scale * f.df(u0[i]);
  const Tridiag wm = assemble_1d_weighted_mass(w);

  Tridiag pencil;
  pencil.diag = k1.diag + m1.diag - wm.diag;
  pencil.off = k1.off + m1.off - wm.off;

  HyperbolicityReport rep;
  rep.eigenvalues = tridiag_gen_eigs(pencil, m1);
  rep.min_abs_eigenvalue = std::numeric_limits<double>::max();
  for (double ev : rep.eigenvalues)
    rep.min_abs_eigenvalue = std::min(rep.min_abs_eigenvalue, std::abs(ev));
  rep.hyperbolic = rep.min_abs_eigenvalue > gap_tol;
  return rep;
}

}  // namespace thinhomog
