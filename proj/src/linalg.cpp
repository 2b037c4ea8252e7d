#include "thinhomog/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace thinhomog {

namespace {

// Canonical total order on triplets: (row, col, value bits). Sorting by the
// bit pattern pins the floating-point summation order of duplicates.
bool triplet_less(const Triplet& a, const Triplet& b) {
  if (a.row != b.row) return a.row < b.row;
  if (a.col != b.col) return a.col < b.col;
  return std::bit_cast<std::uint64_t>(a.value) < std::bit_cast<std::uint64_t>(b.value);
}

}  // namespace

double SparseMatrix::symmetry_error() const {
  const auto& a = eigen();
  Eigen::SparseMatrix<double, Eigen::RowMajor> d = a - Eigen::SparseMatrix<double, Eigen::RowMajor>(a.transpose());
  double max_entry = 0.0;
  for (Index i = 0; i < a.nonZeros(); ++i)
    max_entry = std::max(max_entry, std::abs(a.valuePtr()[i]));
  double max_diff = 0.0;
  for (Index i = 0; i < d.nonZeros(); ++i)
    max_diff = std::max(max_diff, std::abs(d.valuePtr()[i]));
  if (max_entry == 0.0) return 0.0;
  return max_diff / max_entry;
}

SparseMatrix csr_from_triplets(Index n, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw InvalidArgumentError("csr_from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), triplet_less);

  Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
  std::vector<Eigen::Triplet<double>> et;
  et.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const int r = triplets[i].row;
    const int c = triplets[i].col;
    double sum = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      sum += triplets[i].value;
      ++i;
    }
    et.emplace_back(r, c, sum);
  }
  m.setFromTriplets(et.begin(), et.end());
  m.makeCompressed();
  return SparseMatrix(std::move(m));
}

SparseMatrix map_dofs(const SparseMatrix& a, std::span<const int> map, Index n_reduced) {
  const auto& m = a.eigen();
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      out.push_back({map[static_cast<std::size_t>(r)],
                     map[static_cast<std::size_t>(it.col())], it.value()});
    }
  }
  return csr_from_triplets(n_reduced, std::move(out));
}

Vector map_dofs(const Vector& v, std::span<const int> map, Index n_reduced) {
  Vector out = Vector::Zero(n_reduced);
  for (Index i = 0; i < v.size(); ++i) out[map[static_cast<std::size_t>(i)]] += v[i];
  return out;
}

CgResult cg_solve(const SparseMatrix& a, const Vector& b, double tol, int max_iter) {
  if (tol <= 0.0) throw InvalidArgumentError("cg_solve: tol must be positive");
  if (a.size() != b.size()) throw InvalidArgumentError("cg_solve: dimension mismatch");

  const double bnorm = b.norm();
  CgResult res;
  res.x = Vector::Zero(b.size());
  if (bnorm == 0.0) return res;

  Vector inv_diag = a.diagonal();
  for (Index i = 0; i < inv_diag.size(); ++i)
    inv_diag[i] = (inv_diag[i] != 0.0) ? 1.0 / inv_diag[i] : 1.0;

  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);

  const double stop = tol * bnorm;
  bool restart = false;
  for (int it = 1; it <= max_iter; ++it) {
    Vector ap = a * p;
    const double pap = p.dot(ap);
    if (!std::isfinite(pap)) throw BreakdownError("cg_solve: non-finite curvature");
    if (pap <= 0.0)
      throw IndefiniteOperatorError("cg_solve: non-positive curvature direction");
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = it;
    const double rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw BreakdownError("cg_solve: non-finite residual");
    if (rnorm <= stop) {
      // Recurrence residuals drift; trust only an explicit matvec.
      res.final_residual = (b - a * res.x).norm();
      if (res.final_residual <= stop) return res;
      r = b - a * res.x;
      restart = true;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    if (!std::isfinite(rz_next)) throw BreakdownError("cg_solve: non-finite inner product");
    p = restart ? z : Vector(z + (rz_next / rz) * p);
    restart = false;
    rz = rz_next;
  }
  const double final_res = (b - a * res.x).norm();
  throw NonConvergenceError("cg_solve: max_iter reached", final_res);
}

Vector Tridiag::multiply(const Vector& x) const {
  const Index n = size();
  Vector y = diag.cwiseProduct(x);
  for (Index i = 0; i + 1 < n; ++i) {
    y[i] += off[i] * x[i + 1];
    y[i + 1] += off[i] * x[i];
  }
  return y;
}

Eigen::MatrixXd Tridiag::dense() const {
  const Index n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = diag[i];
  for (Index i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = off[i];
    m(i + 1, i) = off[i];
  }
  return m;
}

Vector tridiag_solve(const Vector& sub, const Vector& diag, const Vector& super,
                     const Vector& rhs) {
  const Index n = diag.size();
  if (sub.size() != n - 1 || super.size() != n - 1 || rhs.size() != n)
    throw InvalidArgumentError("tridiag_solve: dimension mismatch");
  Vector c(n - 1), d(n), x(n);
  double piv = diag[0];
  if (piv == 0.0) throw FactorizationError("tridiag_solve: zero pivot");
  c[0] = super[0] / piv;
  d[0] = rhs[0] / piv;
  for (Index i = 1; i < n; ++i) {
    piv = diag[i] - sub[i - 1] * c[i - 1];
    if (piv == 0.0) throw FactorizationError("tridiag_solve: zero pivot");
    if (i < n - 1) c[i] = super[i] / piv;
    d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> tridiag_gen_eigs(const Tridiag& k, const Tridiag& m) {
  const Index n = k.size();
  if (m.size() != n) throw InvalidArgumentError("tridiag_gen_eigs: dimension mismatch");

  Eigen::MatrixXd kd = k.dense();
  Eigen::MatrixXd md = m.dense();
  Eigen::LLT<Eigen::MatrixXd> llt(md);
  if (llt.info() != Eigen::Success)
    throw FactorizationError("tridiag_gen_eigs: M is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(kd, md,
                                                                   Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error("tridiag_gen_eigs: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace thinhomog
