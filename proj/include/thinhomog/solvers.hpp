// Damped Newton solvers for the discrete 2D problem A_eps u = F_eps(u) and
// the 1D limit A0 u = F0(u), plus equilibria enumeration and hyperbolicity.
#pragma once

#include <vector>

#include "thinhomog/fem.hpp"
#include "thinhomog/profiles.hpp"

namespace thinhomog {

struct NewtonOptions {
  double tol = 1e-11;
  int max_newton = 30;
  int max_halvings = 8;
  double cg_tol = 1e-10;  // relative to ||R||; tighter is below the FP floor
  int cg_max_iter = 50000;
};

struct SolveResult {
  Vector solution;
  std::vector<double> residual_history;  // ||R|| per accepted iterate, incl. start
  int iterations = 0;
  bool converged = false;
  double linf_norm = 0.0;
  bool r_bound_ok = false;  // ||u||_inf <= cutoff radius R
  bool used_normal_equations = false;
};

/// Linear resolvent (K_aniso + M) u = M rhs by CG.
SolveResult solve_linear_eps(const ThinMesh& m, double eps, const Vector& rhs,
                             double tol = 1e-10, int max_iter = 50000);

/// Damped Newton on R(u) = (K_aniso + M) u - strip_load(f, u) with the exact
/// Jacobian (K_aniso + M) - strip_jacobian(f, u). Halving line search on
/// ||R||, convergence when ||R(u)|| <= tol * (1 + ||R(u_init)||). Falls back
/// to CG on the normal equations when the Jacobian turns indefinite (flagged
/// in the result, never silent).
SolveResult newton_eps(const ThinMesh& m, double eps, const Nonlinearity& f,
                       Vector u_init, const NewtonOptions& opt = {});

/// Same contract for the limit problem (K1 + M1) u = M1 (f0_scale * f(u)) on
/// n intervals over (0, 1).
SolveResult newton_limit(int n, const HomogenizedData& hd, const Nonlinearity& f,
                         Vector u_init, const NewtonOptions& opt = {});

struct EquilibriaResult {
  std::vector<SolveResult> equilibria;  // sorted by mean value
  int total_starts = 0;
  int failed_starts = 0;
  int discarded_out_of_ball = 0;
};

/// Multistart Newton from constant initial guesses spanning [-R, R], each
/// also perturbed by +-0.1 cos(pi x); converged solutions deduplicated by
/// L-infinity distance > 1e-6 and restricted to ||u||_inf <= R.
EquilibriaResult find_equilibria_limit(int n, const HomogenizedData& hd,
                                       const Nonlinearity& f, double bound_r,
                                       int multistart, const NewtonOptions& opt = {});

struct HyperbolicityReport {
  std::vector<double> eigenvalues;  // ascending
  double min_abs_eigenvalue = 0.0;
  bool hyperbolic = false;
};

/// Spectrum of -q0 v'' + v - f0'(u0) v = lambda v (Neumann): pencil
/// K1 + M1 - W(f0_scale f'(u0)) against M1 with W the weighted mass.
HyperbolicityReport hyperbolicity(const Vector& u0, const HomogenizedData& hd,
                                  const Nonlinearity& f, double gap_tol = 1e-8);

/// Mass-weighted mean of a Field1D over (0, 1).
double field1d_mean(const Vector& u);

/// True when the tail of a Newton residual history contracts quadratically:
/// over the last three meaningful steps, ||R_{k+1}|| / ||R_k||^2 <= c_bound.
/// Steps whose predecessor already sits below `floor` are inner-solver noise
/// and are skipped.
bool quadratic_tail_ok(const std::vector<double>& history, double c_bound = 1e4,
                       double floor = 1e-7);

}  // namespace thinhomog
