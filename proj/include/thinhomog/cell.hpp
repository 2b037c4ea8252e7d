// Periodic cell problem on Y*: -Delta X = 0 with dX/dN = N1 on the top
// boundary, periodic in y1, zero mean; and the homogenized coefficient
//   q0 = (1/|Y*|) int_{Y*} (1 - dX/dy1).
#pragma once

#include "thinhomog/fem.hpp"
#include "thinhomog/mesh.hpp"

namespace thinhomog {

/// Weak-form right side int_{B1} N1 phi ds. On the discrete top polyline
/// N1 ds = -slope dy1 exactly, so entries telescope: their sum vanishes to
/// roundoff by periodicity of g.
Vector assemble_cell_rhs(const CellMesh& m);

struct Q0Result {
  double average = 1.0;      // (1/|Y*|) int (1 - d1 X)
  double energy_form = 1.0;  // 1 - (int |grad X|^2) / |Y*|
  double discrepancy = 0.0;
  double corrector_energy = 0.0;  // int |grad X|^2
};

/// Both q0 formulas; they agree up to the linear-solver tolerance by the
/// discrete integration-by-parts identity.
Q0Result homogenized_q0(const CellMesh& m, const Vector& x);

struct CellSolution {
  Vector X;  // nodal corrector on the full vertex set, zero mean
  double q0 = 1.0;
  double q0_energy = 1.0;
  double q0_discrepancy = 0.0;
  double corrector_energy = 0.0;
  double compatibility_residual = 0.0;
  double mean_X = 0.0;
  double x_l2 = 0.0;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

/// Merges periodic pairs into single unknowns, pins one vertex to fix the
/// constant, CG-solves, then subtracts the mass-weighted mean.
CellSolution solve_cell(const CellMesh& m, double cg_tol = 1e-12, int cg_max_iter = 50000);

}  // namespace thinhomog
