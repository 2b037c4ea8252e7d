// Structured strip-conforming triangulations of the rescaled thin domain and
// periodic triangulations of the representative cell.
#pragma once

#include <array>
#include <utility>
#include <vector>

#include "thinhomog/linalg.hpp"
#include "thinhomog/profiles.hpp"

namespace thinhomog {

struct MeshResolution {
  int points_per_period = 10;  // columns per oscillation period (>= 4)
  int bulk_rows = 6;           // rows below the strip interface (>= 2)
  int strip_rows = 3;          // rows inside the strip (>= 2)
  int refinement_level = 0;    // uniform refinements (doubles all counts)

  void validate() const;
};

/// Triangulation of Omega_eps = {0 < x1 < 1, 0 < x2 < g(x1/eps)} built from
/// N+1 vertical fibers. Each fiber carries bulk_rows uniform intervals below
/// the strip interface x2 = g_eps - eps*h_eps and strip_rows above it, so the
/// strip theta_eps is exactly a union of elements.
struct ThinMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;      // positively oriented
  std::vector<int> strip_elements;                // triangle indices
  int columns = 0;     // N: fibers at x1 = i/N, i = 0..N
  int bulk_rows = 0;   // M_b
  int strip_rows = 0;  // M_s
  double eps = 0.0;
  double beta = 1.0;
  std::vector<std::vector<int>> fibers;  // per-column vertex indices, bottom-up
  std::vector<double> column_x;          // x1 per column
  std::vector<double> interface_x2;      // g_eps - eps*h_eps per column
  std::vector<double> top_x2;            // g_eps per column

  int rows_per_column() const { return bulk_rows + strip_rows + 1; }
  int vertex_index(int col, int row) const { return col * rows_per_column() + row; }
  double area() const;
  double strip_area() const;
  bool is_strip(int triangle) const;
};

/// Periodic triangulation of Y* = {0 < y1 < L_g, 0 < y2 < g(y1)}; columns
/// i = 0 and i = N carry the same fiber heights and are paired.
struct CellMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::pair<int, int>> periodic_pairs;  // (left vertex, right vertex)
  std::vector<std::pair<int, int>> top_edges;       // consecutive top vertices, B1
  std::vector<std::pair<int, int>> bottom_edges;    // consecutive bottom vertices, B2
  int columns = 0;
  int rows = 0;
  double period = 1.0;
  std::vector<double> column_y1;
  std::vector<double> top_y2;

  int rows_per_column() const { return rows + 1; }
  int vertex_index(int col, int row) const { return col * rows_per_column() + row; }
  double area() const;
};

/// Throws StripOverflowError when eps * max(h) >= min(g) and GeometryError on
/// degenerate columns. Column count obeys
/// N >= points_per_period * max(1/(eps*L_g), 1/(eps^beta*L_h)) over the
/// profiles that actually oscillate.
ThinMesh build_thin_mesh(const ProfileSpec& g, const ProfileSpec& h, double eps,
                         double beta, const MeshResolution& res);

/// rows_override > 0 picks the fiber subdivision directly, otherwise rows are
/// chosen to keep elements near unit aspect ratio.
CellMesh build_cell_mesh(const ProfileSpec& g, const MeshResolution& res,
                         int rows_override = 0);

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_area = 0.0;
  double max_aspect_ratio = 0.0;
  std::vector<int> aspect_histogram;  // bins [1,2), [2,4), [4,8), ...
};

template <class Mesh>
QualityReport mesh_quality(const Mesh& m);

double triangle_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c);

}  // namespace thinhomog
