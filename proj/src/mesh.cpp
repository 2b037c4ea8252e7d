#include "thinhomog/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thinhomog {

void MeshResolution::validate() const {
  if (points_per_period < 4)
    throw InvalidArgumentError("mesh resolution: points_per_period must be >= 4");
  if (bulk_rows < 2 || strip_rows < 2)
    throw InvalidArgumentError("mesh resolution: row counts must be >= 2");
  if (refinement_level < 0)
    throw InvalidArgumentError("mesh resolution: refinement_level must be >= 0");
}

double triangle_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

namespace {

template <class Mesh>
double mesh_area(const Mesh& m) {
  double a = 0.0;
  for (const auto& t : m.triangles)
    a += triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  return a;
}

// Two triangles per quad, diagonal fixed from bottom-left to top-right.
template <class Mesh>
void connect_columns(Mesh& m, int col, int rows_per_column) {
  for (int j = 0; j + 1 < rows_per_column; ++j) {
    const int a = m.vertex_index(col, j);
    const int b = m.vertex_index(col + 1, j);
    const int c = m.vertex_index(col + 1, j + 1);
    const int d = m.vertex_index(col, j + 1);
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  }
}

}  // namespace

double ThinMesh::area() const { return mesh_area(*this); }
double CellMesh::area() const { return mesh_area(*this); }

double ThinMesh::strip_area() const {
  double a = 0.0;
  for (int t : strip_elements)
    a += triangle_area(vertices[triangles[t][0]], vertices[triangles[t][1]],
                       vertices[triangles[t][2]]);
  return a;
}

bool ThinMesh::is_strip(int triangle) const {
  return std::binary_search(strip_elements.begin(), strip_elements.end(), triangle);
}

ThinMesh build_thin_mesh(const ProfileSpec& g, const ProfileSpec& h, double eps,
                         double beta, const MeshResolution& res) {
  res.validate();
  g.validate();
  h.validate();
  if (!(eps > 0.0)) throw InvalidArgumentError("build_thin_mesh: eps must be positive");
  if (!(beta > 0.0)) throw InvalidArgumentError("build_thin_mesh: beta must be positive");
  if (!(g.min_value() > 0.0))
    throw InvalidArgumentError("build_thin_mesh: g must be strictly positive");
  if (h.min_value() < 0.0)
    throw InvalidArgumentError("build_thin_mesh: h must be nonnegative");
  if (eps * h.max_value() >= g.min_value())
    throw StripOverflowError("build_thin_mesh: eps*h1 >= g0, strip does not fit");

  const int scale = 1 << res.refinement_level;

  // Resolve every oscillation actually present.
  double inv_scale = 1.0;
  if (!g.is_constant()) inv_scale = std::max(inv_scale, 1.0 / (eps * g.period));
  if (!h.is_constant())
    inv_scale = std::max(inv_scale, 1.0 / (std::pow(eps, beta) * h.period));
  const int columns =
      scale * static_cast<int>(std::ceil(res.points_per_period * inv_scale - 1e-9));
  const int mb = scale * res.bulk_rows;
  const int ms = scale * res.strip_rows;

  ThinMesh m;
  m.columns = columns;
  m.bulk_rows = mb;
  m.strip_rows = ms;
  m.eps = eps;
  m.beta = beta;

  const int rpc = m.rows_per_column();
  m.vertices.reserve(static_cast<std::size_t>(columns + 1) * rpc);
  m.column_x.resize(columns + 1);
  m.interface_x2.resize(columns + 1);
  m.top_x2.resize(columns + 1);
  m.fibers.resize(columns + 1);

  for (int i = 0; i <= columns; ++i) {
    const double x1 = static_cast<double>(i) / columns;
    const double top = eval_profile(g, x1 / eps);
    const double interface = top - eps * eval_profile(h, x1 / std::pow(eps, beta));
    if (!(interface > 0.0))
      throw GeometryError("build_thin_mesh: degenerate column, interface <= 0");
    m.column_x[i] = x1;
    m.top_x2[i] = top;
    m.interface_x2[i] = interface;
    m.fibers[i].reserve(rpc);
    for (int j = 0; j <= mb; ++j) {
      // The interface node must sit at g_eps - eps*h_eps bit-exactly.
      m.vertices.push_back({x1, j == mb ? interface : interface * j / mb});
      m.fibers[i].push_back(m.vertex_index(i, j));
    }
    for (int j = 1; j <= ms; ++j) {
      m.vertices.push_back({x1, j == ms ? top : interface + (top - interface) * j / ms});
      m.fibers[i].push_back(m.vertex_index(i, mb + j));
    }
  }

  m.triangles.reserve(static_cast<std::size_t>(2 * columns) * (rpc - 1));
  for (int i = 0; i < columns; ++i) connect_columns(m, i, rpc);

  // Quads above the interface row produce the strip elements.
  for (int i = 0; i < columns; ++i) {
    for (int j = mb; j < mb + ms; ++j) {
      const int quad = i * (rpc - 1) + j;
      m.strip_elements.push_back(2 * quad);
      m.strip_elements.push_back(2 * quad + 1);
    }
  }
  std::sort(m.strip_elements.begin(), m.strip_elements.end());
  return m;
}

CellMesh build_cell_mesh(const ProfileSpec& g, const MeshResolution& res,
                         int rows_override) {
  res.validate();
  g.validate();
  if (!(g.min_value() > 0.0))
    throw InvalidArgumentError("build_cell_mesh: g must be strictly positive");

  const int scale = 1 << res.refinement_level;
  const int columns = scale * res.points_per_period;
  const double lg = g.period;
  const int rows =
      rows_override > 0
          ? rows_override
          : std::max(2, static_cast<int>(std::lround(columns * g.max_value() / lg)));

  CellMesh m;
  m.columns = columns;
  m.rows = rows;
  m.period = lg;
  const int rpc = m.rows_per_column();
  m.vertices.reserve(static_cast<std::size_t>(columns + 1) * rpc);
  m.column_y1.resize(columns + 1);
  m.top_y2.resize(columns + 1);

  for (int i = 0; i <= columns; ++i) {
    const double y1 = lg * i / columns;
    // Periodicity of the paired fibers must hold exactly.
    const double top = (i == columns) ? eval_profile(g, 0.0) : eval_profile(g, y1);
    m.column_y1[i] = y1;
    m.top_y2[i] = top;
    for (int j = 0; j <= rows; ++j) m.vertices.push_back({y1, top * j / rows});
  }

  m.triangles.reserve(static_cast<std::size_t>(2 * columns) * rows);
  for (int i = 0; i < columns; ++i) connect_columns(m, i, rpc);

  for (int j = 0; j <= rows; ++j)
    m.periodic_pairs.emplace_back(m.vertex_index(0, j), m.vertex_index(columns, j));
  for (int i = 0; i < columns; ++i) {
    m.top_edges.emplace_back(m.vertex_index(i, rows), m.vertex_index(i + 1, rows));
    m.bottom_edges.emplace_back(m.vertex_index(i, 0), m.vertex_index(i + 1, 0));
  }
  return m;
}

template <class Mesh>
QualityReport mesh_quality(const Mesh& m) {
  QualityReport q;
  q.min_angle_deg = 180.0;
  q.min_area = std::numeric_limits<double>::max();
  q.aspect_histogram.assign(12, 0);
  for (const auto& t : m.triangles) {
    const auto& a = m.vertices[t[0]];
    const auto& b = m.vertices[t[1]];
    const auto& c = m.vertices[t[2]];
    const double area = triangle_area(a, b, c);
    q.min_area = std::min(q.min_area, area);

    const double la = std::hypot(c[0] - b[0], c[1] - b[1]);
    const double lb = std::hypot(c[0] - a[0], c[1] - a[1]);
    const double lc = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double lmax = std::max({la, lb, lc});
    const double lmin = std::min({la, lb, lc});
    const double aspect = lmax / lmin;
    q.max_aspect_ratio = std::max(q.max_aspect_ratio, aspect);
    int bin = std::min<int>(11, static_cast<int>(std::log2(std::max(1.0, aspect))));
    ++q.aspect_histogram[static_cast<std::size_t>(bin)];

    // Law of cosines per corner.
    auto angle = [](double opp, double s1, double s2) {
      double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      cosv = std::clamp(cosv, -1.0, 1.0);
      return std::acos(cosv) * 180.0 / std::numbers::pi;
    };
    for (double ang : {angle(la, lb, lc), angle(lb, la, lc), angle(lc, la, lb)}) {
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
      q.max_angle_deg = std::max(q.max_angle_deg, ang);
    }
  }
  return q;
}

template QualityReport mesh_quality<ThinMesh>(const ThinMesh&);
template QualityReport mesh_quality<CellMesh>(const CellMesh&);

}  // namespace thinhomog
