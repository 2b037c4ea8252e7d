// The constant-in-fiber extension E_eps, E-distances, concentrated-integral
// functionals, and the three experiment suites: uniform trace-inequality
// ratios, concentration limits, and the semicontinuity sweeps.
#pragma once

#include <string>
#include <vector>

#include "thinhomog/config.hpp"
#include "thinhomog/fem.hpp"
#include "thinhomog/solvers.hpp"

namespace thinhomog {

/// (E_eps u0)(x1, x2) = u0(x1): constant along each fiber, u0 evaluated by
/// linear interpolation at the column abscissae.
Vector extend_E(const ThinMesh& m, const Vector& u0);

enum class EDistanceNorm { L2, Hs };

/// ||u_eps - E_eps u0|| in L^2(Omega_eps) or the fiberwise-H^s Bochner norm.
double e_distance(const ThinMesh& m, const Vector& u_eps, const Vector& u0,
                  EDistanceNorm norm, double s = 0.75, int fiber_stride = 4);

/// (1/eps) int_strip |I_h u|^q.
double concentrated_integral(const ThinMesh& m, double eps, const Vector& u, double q);

struct ConvergenceRow {
  double eps = 0.0;
  int mesh_columns = 0;
  std::string metric;
  double value = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // sorted by decreasing eps

  void add(double eps, int columns, std::string metric, double value);
  /// Values of one metric in decreasing-eps order.
  std::vector<double> series(const std::string& metric) const;
};

struct InequalityEpsRow {
  double eps = 0.0;
  int mesh_columns = 0;
  double max_ratio_h1 = 0.0;  // (1/eps) int_strip u^2 / ||u||_H1^2
  double max_ratio_hs = 0.0;  // same against the Bochner H^s norm
};

struct InequalityReport {
  std::vector<InequalityEpsRow> per_eps;  // decreasing eps
  double spread_h1 = 0.0;                 // max over eps / min over eps
  double spread_hs = 0.0;
  bool bounded_h1 = false;  // max at smallest eps <= 2x max at largest
  bool bounded_hs = false;
};

/// Random + boundary-layer trial fields per eps; ratios of the concentrated
/// L^2 integral against the H^1 and Bochner-H^s norms.
InequalityReport check_trace_inequality(const ExperimentConfig& cfg);

/// Concentration limit |(1/eps) int_strip f(u_eps) phi - mu_h int f(u0) phi|.
/// In quadrature mode u_eps = E_eps u0; in solver mode u_eps solves the 2D
/// problem started from E_eps u0.
ConvergenceTable check_concentration_limit(const ExperimentConfig& cfg);

struct SemicontinuityReport {
  ConvergenceTable table;
  std::vector<double> eps;
  std::vector<double> equilibria_means;
  std::vector<double> min_abs_eigenvalues;
  bool all_hyperbolic = true;
  int newton_failures = 0;
  std::vector<double> lower_hausdorff;  // per eps, decreasing-eps order
  std::vector<double> upper_hausdorff;
  bool lower_decreasing = false;
  bool upper_decreasing = false;
  double lower_factor = 0.0;  // first / last
  double upper_factor = 0.0;
};

/// Theorem-2.4-style sweep: limit equilibria + hyperbolicity, then per eps the
/// 2D shadows (lower semicontinuity) and a 2D multistart census (upper).
SemicontinuityReport semicontinuity_experiment(const ExperimentConfig& cfg);

/// Strictly decreasing with overall improvement factor >= min_factor over at
/// least 3 levels (the finite proxy used for the asymptotic statements).
bool strictly_decreasing_with_factor(const std::vector<double>& v, double min_factor);

/// Field1D on n+1 nodes from one of the config expressions one|zero|x|cospi.
Vector field1d_from_expr(const std::string& expr, int n);

}  // namespace thinhomog
