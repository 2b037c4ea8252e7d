// P1 finite element assembly on thin/cell meshes, 1D Neumann matrices, and
// the fiberwise fractional Sobolev / Lebesgue-Bochner norms.
//
// A Field is a Vector of one nodal value per mesh vertex; a Field1D is a
// Vector of n+1 nodal values on the uniform grid over (0, 1).
#pragma once

#include <functional>
#include <span>
#include <utility>

#include "thinhomog/linalg.hpp"
#include "thinhomog/mesh.hpp"
#include "thinhomog/profiles.hpp"

namespace thinhomog {

/// Gradient bilinear form with diffusion tensor diag(ax, ay).
template <class Mesh>
SparseMatrix assemble_stiffness(const Mesh& m, double ax, double ay);

/// diag(1, 1/eps^2) stiffness of the rescaled problem. Positive semidefinite
/// with the constants as kernel.
SparseMatrix assemble_stiffness_aniso(const ThinMesh& m, double eps);

template <class Mesh>
SparseMatrix assemble_mass(const Mesh& m);

/// Mass restricted to a set of elements (strip/bulk partitions).
template <class Mesh>
SparseMatrix assemble_mass_on(const Mesh& m, std::span<const int> elements);

/// (u, v) -> (1/eps) int_strip w u v with w the P1 interpolant of the given
/// nodal weight; 3-point (quadratic-exact) rule per strip element.
SparseMatrix assemble_strip_matrix(const ThinMesh& m, double eps, const Vector& weight);

/// Newton Jacobian block: same bilinear form with weight f'(I_h u) evaluated
/// at the quadrature points, which is the exact derivative of
/// assemble_strip_load with respect to the nodal values.
SparseMatrix assemble_strip_jacobian(const ThinMesh& m, double eps,
                                     const Nonlinearity& f, const Vector& u);

/// b_i = (1/eps) int_strip f(I_h u) phi_i, 3-point rule per strip element.
Vector assemble_strip_load(const ThinMesh& m, double eps, const Nonlinearity& f,
                           const Vector& u);

/// (1/eps) int_strip |I_h u|^q.
double strip_integral_pow(const ThinMesh& m, double eps, const Vector& u, double q);

/// (1/eps) int_strip f(I_h u) I_h phi.
double strip_integral_fu_phi(const ThinMesh& m, double eps, const Nonlinearity& f,
                             const Vector& u, const Vector& phi);

/// 1D Neumann P1 pair on n intervals over (0, 1): K1 = q0 * stiffness,
/// M1 = mass; both tridiagonal of size n+1.
std::pair<Tridiag, Tridiag> assemble_1d(int n, double q0);

/// Tridiagonal weighted mass int w phi_i phi_j with w the P1 interpolant of
/// the nodal weight (equals w * M1 for constant w).
Tridiag assemble_1d_weighted_mass(const Vector& weight);

/// Squared Gagliardo seminorm of the P1 interpolant on one fiber,
///   int int |u(x)-u(y)|^2 / |x-y|^{1+2s} dx dy,
/// evaluated in closed form panel-pair by panel-pair.
double fractional_seminorm_fiber(std::span<const double> values,
                                 std::span<const double> coords, double s);

double fiber_l2_sq(std::span<const double> values, std::span<const double> coords);
double fiber_h1_semi_sq(std::span<const double> values, std::span<const double> coords);

/// L^2(0,1; H^s(0, g_eps(x1))) norm of a Field: trapezoid over sampled fibers
/// of the fiberwise norm. s = 0 gives the plain fiberwise L^2 norm, s = 1 the
/// fiberwise H^1 norm.
double bochner_norm(const ThinMesh& m, const Vector& u, double s, int fiber_stride);

struct NormParts {
  double l2_sq = 0.0;
  double dx1_sq = 0.0;
  double dx2_sq = 0.0;

  double h1_sq() const { return l2_sq + dx1_sq + dx2_sq; }
  double h1_eps_sq(double eps) const { return l2_sq + dx1_sq + dx2_sq / (eps * eps); }
};

/// Elementwise ||u||^2, ||d1 u||^2, ||d2 u||^2 over the whole mesh.
template <class Mesh>
NormParts compute_norm_parts(const Mesh& m, const Vector& u);

/// L^2(Omega_eps) norm of a Field.
template <class Mesh>
double l2_norm(const Mesh& m, const Vector& u);

/// Integral average of I_h u along one fiber.
double fiber_mean(const ThinMesh& m, const Vector& u, int column);

/// Linear interpolation of a Field1D (n+1 uniform nodes on [0,1]) at x.
double eval_field1d(const Vector& u, double x);

}  // namespace thinhomog
