// Deterministic sparse/dense linear algebra on top of Eigen:
// CSR symmetric matrices, Jacobi-preconditioned CG, and a generalized
// eigensolver for symmetric tridiagonal pencils.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "thinhomog/errors.hpp"

namespace thinhomog {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Square sparse matrix stored compressed row-wise (CSR).
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor> m)
      : m_(std::move(m)) {
    m_.makeCompressed();
  }

  Index size() const { return m_.rows(); }
  Index nonZeros() const { return m_.nonZeros(); }

  Vector operator*(const Vector& x) const { return m_ * x; }

  Vector diagonal() const { return m_.diagonal(); }

  double coeff(Index i, Index j) const { return m_.coeff(i, j); }

  /// Max |A - A^T| entry relative to the max |A| entry.
  double symmetry_error() const;
  bool is_symmetric(double rel_tol = 1e-14) const {
    return symmetry_error() <= rel_tol;
  }

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& eigen() const { return m_; }

  SparseMatrix operator+(const SparseMatrix& other) const {
    return SparseMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor>(m_ + other.m_));
  }
  SparseMatrix operator-(const SparseMatrix& other) const {
    return SparseMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor>(m_ - other.m_));
  }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> m_;
};

/// Assembles CSR from (row, col, value) triplets. Duplicates are summed.
/// Triplets are canonically ordered before accumulation, so the result is
/// bitwise identical no matter how the input was ordered.
SparseMatrix csr_from_triplets(Index n, std::vector<Triplet> triplets);

/// Remaps matrix entries through a DOF map (used to merge periodic pairs):
/// entry (i, j, v) becomes (map[i], map[j], v), duplicates summed.
SparseMatrix map_dofs(const SparseMatrix& a, std::span<const int> map, Index n_reduced);

/// Accumulates vector entries through a DOF map.
Vector map_dofs(const Vector& v, std::span<const int> map, Index n_reduced);

struct CgResult {
  Vector x;
  int iterations = 0;
  double final_residual = 0.0;  // ||b - Ax||_2 recomputed by explicit matvec
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Stops when ||b - Ax||_2 <= tol * ||b||_2 (verified post hoc by an
/// explicit matvec). Throws NonConvergenceError past max_iter,
/// BreakdownError on non-finite intermediates, and IndefiniteOperatorError
/// when a direction of non-positive curvature shows up.
CgResult cg_solve(const SparseMatrix& a, const Vector& b, double tol, int max_iter);

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct Tridiag {
  Vector diag;
  Vector off;

  Index size() const { return diag.size(); }
  Vector multiply(const Vector& x) const;
  Eigen::MatrixXd dense() const;
};

/// General (possibly nonsymmetric) tridiagonal system solved by elimination.
/// sub and super have n-1 entries.
Vector tridiag_solve(const Vector& sub, const Vector& diag, const Vector& super,
                     const Vector& rhs);

/// All eigenvalues of K v = lambda M v for symmetric tridiagonal K and SPD
/// tridiagonal M, ascending. Reduction by Cholesky of M to a standard
/// symmetric problem (Eigen's generalized self-adjoint solver).
std::vector<double> tridiag_gen_eigs(const Tridiag& k, const Tridiag& m);

}  // namespace thinhomog
