#include "thinhomog/cell.hpp"

#include <cmath>
#include <numeric>

namespace thinhomog {

Vector assemble_cell_rhs(const CellMesh& m) {
  Vector b = Vector::Zero(static_cast<Index>(m.vertices.size()));
  // 2-point Gauss per top edge; the integrand slope * phi is linear there, so
  // the rule is exact.
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  for (const auto& [va, vb] : m.top_edges) {
    const double y0 = m.vertices[static_cast<std::size_t>(va)][0];
    const double y1 = m.vertices[static_cast<std::size_t>(vb)][0];
    const double g0 = m.vertices[static_cast<std::size_t>(va)][1];
    const double g1 = m.vertices[static_cast<std::size_t>(vb)][1];
    const double dy = y1 - y0;
    const double slope = (g1 - g0) / dy;
    for (double t : gp) {
      b[va] += -slope * dy * 0.5 * (1.0 - t);
      b[vb] += -slope * dy * 0.5 * t;
    }
  }
  return b;
}

Q0Result homogenized_q0(const CellMesh& m, const Vector& x) {
  Q0Result r;
  double area = 0.0;
  double d1_integral = 0.0;
  double energy = 0.0;
  for (const auto& t : m.triangles) {
    const auto& a = m.vertices[static_cast<std::size_t>(t[0])];
    const auto& b = m.vertices[static_cast<std::size_t>(t[1])];
    const auto& c = m.vertices[static_cast<std::size_t>(t[2])];
    const double ar = triangle_area(a, b, c);
    const double inv = 1.0 / (2.0 * ar);
    const double dx = inv * (x[t[0]] * (b[1] - c[1]) + x[t[1]] * (c[1] - a[1]) +
                             x[t[2]] * (a[1] - b[1]));
    const double dy = inv * (x[t[0]] * (c[0] - b[0]) + x[t[1]] * (a[0] - c[0]) +
                             x[t[2]] * (b[0] - a[0]));
    area += ar;
    d1_integral += ar * dx;
    energy += ar * (dx * dx + dy * dy);
  }
  r.average = (area - d1_integral) / area;
  r.energy_form = 1.0 - energy / area;
  r.discrepancy = std::abs(r.average - r.energy_form);
  r.corrector_energy = energy;
  return r;
}

CellSolution solve_cell(const CellMesh& m, double cg_tol, int cg_max_iter) {
  const Index n_full = static_cast<Index>(m.vertices.size());
  Vector rhs = assemble_cell_rhs(m);

  CellSolution sol;
  double abs_sum = rhs.cwiseAbs().sum();
  sol.compatibility_residual = std::abs(rhs.sum()) / std::max(abs_sum, 1e-300);
  if (abs_sum > 0.0 && sol.compatibility_residual > 1e-10)
    throw CompatibilityError("solve_cell: right side violates the zero-sum condition");

  // Merge each right-boundary vertex into its periodic partner.
  std::vector<int> map(static_cast<std::size_t>(n_full));
  std::iota(map.begin(), map.end(), 0);
  for (const auto& [left, right] : m.periodic_pairs) map[static_cast<std::size_t>(right)] = left;
  // Compact the surviving indices.
  const int rpc = m.rows_per_column();
  const Index n_red = static_cast<Index>(m.columns) * rpc;
  for (auto& v : map)
    if (v >= n_red) throw Error("solve_cell: unexpected periodic layout");

  SparseMatrix k_red = map_dofs(assemble_stiffness(m, 1.0, 1.0), map, n_red);
  Vector b_red = map_dofs(rhs, map, n_red);

  // Pin unknown 0: drop its row/column. Consistency of the compatible system
  // makes the dropped equation hold automatically.
  std::vector<Triplet> trips;
  const auto& ke = k_red.eigen();
  for (Index r = 0; r < ke.rows(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ke, r); it; ++it)
      if (r != 0 && it.col() != 0)
        trips.push_back({static_cast<int>(r - 1), static_cast<int>(it.col() - 1), it.value()});
  SparseMatrix k_pin = csr_from_triplets(n_red - 1, std::move(trips));
  Vector b_pin = b_red.tail(n_red - 1);

  CgResult cg = cg_solve(k_pin, b_pin, cg_tol, cg_max_iter);
  sol.cg_iterations = cg.iterations;
  sol.cg_residual = cg.final_residual;

  Vector x_red = Vector::Zero(n_red);
  x_red.tail(n_red - 1) = cg.x;

  sol.X = Vector::Zero(n_full);
  for (Index v = 0; v < n_full; ++v) sol.X[v] = x_red[map[static_cast<std::size_t>(v)]];

  // Enforce the zero-mean constraint exactly.
  SparseMatrix mass = assemble_mass(m);
  Vector ones = Vector::Ones(n_full);
  const double area = ones.dot(mass * ones);
  const double mean = ones.dot(mass * sol.X) / area;
  sol.X.array() -= mean;
  sol.mean_X = ones.dot(mass * sol.X) / area;
  sol.x_l2 = std::sqrt(std::max(0.0, sol.X.dot(mass * sol.X)));

  const Q0Result q = homogenized_q0(m, sol.X);
  sol.q0 = q.average;
  sol.q0_energy = q.energy_form;
  sol.q0_discrepancy = q.discrepancy;
  sol.corrector_energy = q.corrector_energy;
  return sol;
}

}  // namespace thinhomog
