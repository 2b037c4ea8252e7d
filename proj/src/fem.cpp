#include "thinhomog/fem.hpp"

#include <algorithm>
#include <cmath>

namespace thinhomog {

namespace {

struct ElementGeometry {
  double area;
  double gx[3];  // d phi_i / d x1
  double gy[3];  // d phi_i / d x2
};

template <class Mesh>
ElementGeometry element_geometry(const Mesh& m, const std::array<int, 3>& t) {
  const auto& a = m.vertices[t[0]];
  const auto& b = m.vertices[t[1]];
  const auto& c = m.vertices[t[2]];
  ElementGeometry e{};
  e.area = triangle_area(a, b, c);
  if (!(e.area > 0.0)) throw GeometryError("element with non-positive area");
  const double inv = 1.0 / (2.0 * e.area);
  e.gx[0] = (b[1] - c[1]) * inv;
  e.gx[1] = (c[1] - a[1]) * inv;
  e.gx[2] = (a[1] - b[1]) * inv;
  e.gy[0] = (c[0] - b[0]) * inv;
  e.gy[1] = (a[0] - c[0]) * inv;
  e.gy[2] = (b[0] - a[0]) * inv;
  return e;
}

// 3-point edge-midpoint rule, exact for quadratics. phi values of the three
// P1 basis functions at midpoint q: 1/2 on the two adjacent vertices.
constexpr int kMidpointPairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};

void check_field(Index vertex_count, const Vector& u, const char* who) {
  if (u.size() != vertex_count)
    throw InvalidArgumentError(std::string(who) + ": field length != vertex count");
  if (!u.allFinite())
    throw InvalidArgumentError(std::string(who) + ": field has non-finite values");
}

}  // namespace

template <class Mesh>
SparseMatrix assemble_stiffness(const Mesh& m, double ax, double ay) {
  std::vector<Triplet> trips;
  trips.reserve(m.triangles.size() * 9);
  for (const auto& t : m.triangles) {
    const ElementGeometry e = element_geometry(m, t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({t[i], t[j],
                         e.area * (ax * e.gx[i] * e.gx[j] + ay * e.gy[i] * e.gy[j])});
  }
  return csr_from_triplets(static_cast<Index>(m.vertices.size()), std::move(trips));
}

SparseMatrix assemble_stiffness_aniso(const ThinMesh& m, double eps) {
  if (!(eps > 0.0))
    throw InvalidArgumentError("assemble_stiffness_aniso: eps must be positive");
  return assemble_stiffness(m, 1.0, 1.0 / (eps * eps));
}

template <class Mesh>
SparseMatrix assemble_mass(const Mesh& m) {
  std::vector<Triplet> trips;
  trips.reserve(m.triangles.size() * 9);
  for (const auto& t : m.triangles) {
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({t[i], t[j], a / 12.0 * (i == j ? 2.0 : 1.0)});
  }
  return csr_from_triplets(static_cast<Index>(m.vertices.size()), std::move(trips));
}

template <class Mesh>
SparseMatrix assemble_mass_on(const Mesh& m, std::span<const int> elements) {
  std::vector<Triplet> trips;
  trips.reserve(elements.size() * 9);
  for (int k : elements) {
    const auto& t = m.triangles[static_cast<std::size_t>(k)];
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({t[i], t[j], a / 12.0 * (i == j ? 2.0 : 1.0)});
  }
  return csr_from_triplets(static_cast<Index>(m.vertices.size()), std::move(trips));
}

namespace {

// Shared loop for the strip bilinear forms: weight_at(quad point local pair,
// interpolated u) supplies w at the quadrature point.
template <class WeightAt>
SparseMatrix strip_bilinear(const ThinMesh& m, double eps, WeightAt&& weight_at) {
  std::vector<Triplet> trips;
  trips.reserve(m.strip_elements.size() * 9);
  for (int k : m.strip_elements) {
    const auto& t = m.triangles[static_cast<std::size_t>(k)];
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    const double scale = a / (3.0 * eps);
    for (const auto& pair : kMidpointPairs) {
      const double w = weight_at(t, pair);
      // phi_i phi_j at the midpoint: 1/4 when both i and j touch the edge.
      for (int i : pair)
        for (int j : pair) trips.push_back({t[i], t[j], scale * w * 0.25});
    }
  }
  return csr_from_triplets(static_cast<Index>(m.vertices.size()), std::move(trips));
}

}  // namespace

SparseMatrix assemble_strip_matrix(const ThinMesh& m, double eps, const Vector& weight) {
  check_field(static_cast<Index>(m.vertices.size()), weight, "assemble_strip_matrix");
  if (m.strip_elements.empty())
    throw InvalidArgumentError("assemble_strip_matrix: empty strip");
  return strip_bilinear(m, eps, [&](const std::array<int, 3>& t, const int* pair) {
    return 0.5 * (weight[t[pair[0]]] + weight[t[pair[1]]]);
  });
}

SparseMatrix assemble_strip_jacobian(const ThinMesh& m, double eps,
                                     const Nonlinearity& f, const Vector& u) {
  check_field(static_cast<Index>(m.vertices.size()), u, "assemble_strip_jacobian");
  return strip_bilinear(m, eps, [&](const std::array<int, 3>& t, const int* pair) {
    return f.df(0.5 * (u[t[pair[0]]] + u[t[pair[1]]]));
  });
}

Vector assemble_strip_load(const ThinMesh& m, double eps, const Nonlinearity& f,
                           const Vector& u) {
  check_field(static_cast<Index>(m.vertices.size()), u, "assemble_strip_load");
  Vector b = Vector::Zero(static_cast<Index>(m.vertices.size()));
  for (int k : m.strip_elements) {
    const auto& t = m.triangles[static_cast<std::size_t>(k)];
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    const double scale = a / (3.0 * eps);
    for (const auto& pair : kMidpointPairs) {
      const double fu = f.f(0.5 * (u[t[pair[0]]] + u[t[pair[1]]]));
      for (int i : pair) b[t[i]] += scale * fu * 0.5;
    }
  }
  return b;
}

double strip_integral_pow(const ThinMesh& m, double eps, const Vector& u, double q) {
  check_field(static_cast<Index>(m.vertices.size()), u, "strip_integral_pow");
  if (q < 1.0) throw InvalidArgumentError("strip_integral_pow: q must be >= 1");
  double total = 0.0;
  for (int k : m.strip_elements) {
    const auto& t = m.triangles[static_cast<std::size_t>(k)];
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    for (const auto& pair : kMidpointPairs) {
      const double uq = 0.5 * (u[t[pair[0]]] + u[t[pair[1]]]);
      total += a / 3.0 * std::pow(std::abs(uq), q);
    }
  }
  return total / eps;
}

double strip_integral_fu_phi(const ThinMesh& m, double eps, const Nonlinearity& f,
                             const Vector& u, const Vector& phi) {
  check_field(static_cast<Index>(m.vertices.size()), u, "strip_integral_fu_phi");
  check_field(static_cast<Index>(m.vertices.size()), phi, "strip_integral_fu_phi");
  double total = 0.0;
  for (int k : m.strip_elements) {
    const auto& t = m.triangles[static_cast<std::size_t>(k)];
    const double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    for (const auto& pair : kMidpointPairs) {
      const double uq = 0.5 * (u[t[pair[0]]] + u[t[pair[1]]]);
      const double pq = 0.5 * (phi[t[pair[0]]] + phi[t[pair[1]]]);
      total += a / 3.0 * f.f(uq) * pq;
    }
  }
  return total / eps;
}

std::pair<Tridiag, Tridiag> assemble_1d(int n, double q0) {
  if (n < 2) throw InvalidArgumentError("assemble_1d: need n >= 2 intervals");
  if (!(q0 > 0.0)) throw InvalidArgumentError("assemble_1d: q0 must be positive");
  const double h = 1.0 / n;
  Tridiag k, m;
  k.diag = Vector::Constant(n + 1, 2.0 * q0 / h);
  k.diag[0] = k.diag[n] = q0 / h;
  k.off = Vector::Constant(n, -q0 / h);
  m.diag = Vector::Constant(n + 1, 4.0 * h / 6.0);
  m.diag[0] = m.diag[n] = 2.0 * h / 6.0;
  m.off = Vector::Constant(n, h / 6.0);
  return {std::move(k), std::move(m)};
}

Tridiag assemble_1d_weighted_mass(const Vector& weight) {
  const Index n = weight.size() - 1;
  if (n < 1) throw InvalidArgumentError("assemble_1d_weighted_mass: too few nodes");
  const double h = 1.0 / static_cast<double>(n);
  Tridiag w;
  w.diag = Vector::Zero(n + 1);
  w.off = Vector::Zero(n);
  for (Index e = 0; e < n; ++e) {
    const double wa = weight[e], wb = weight[e + 1];
    w.diag[e] += h / 12.0 * (3.0 * wa + wb);
    w.diag[e + 1] += h / 12.0 * (wa + 3.0 * wb);
    w.off[e] += h / 12.0 * (wa + wb);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Gagliardo seminorm of a P1 fiber interpolant, closed form.
//
// For panels X = [p, q] (left) and Y = [r, t] (right), q <= r, in the
// variables w = y - x, v = y + x the double integral becomes
//   (1/2) int w^{-1-2s} int_{v_lo(w)}^{v_hi(w)} (u(y) - u(x))^2 dv dw
// with piecewise-affine limits. On each w-subinterval u(y) - u(x) is affine
// in w along both limits, the inner integral is a cubic polynomial in w, and
// the outer integral reduces to power antiderivatives. Touching panels
// (q == r) are covered by the same path: the constant and linear
// coefficients vanish identically there because the interpolant is
// continuous at the shared node.
// ---------------------------------------------------------------------------
namespace {

struct Panel {
  double lo, hi;    // coordinates
  double ulo, uhi;  // nodal values
  double slope() const { return (uhi - ulo) / (hi - lo); }
  // Evaluation that is bit-exact at the panel endpoints, so the singular
  // coefficients of touching panels cancel identically.
  double extend(double x) const {
    if (x == lo) return ulo;
    if (x == hi) return uhi;
    return ulo + slope() * (x - lo);
  }
};

double power_term(double a_k, double w0, double w1, double e) {
  if (a_k == 0.0) return 0.0;
  if (std::abs(e) < 1e-12) return a_k * std::log(w1 / w0);
  return a_k * (std::pow(w1, e) - std::pow(w0, e)) / e;
}

double cross_pair(const Panel& x, const Panel& y, double s) {
  const double ma = x.slope();
  const double mb = y.slope();

  const double w_min = y.lo - x.hi;
  const double w_max = y.hi - x.lo;
  const double wb1 = y.lo - x.lo;
  const double wb2 = y.hi - x.hi;
  double bp[4] = {w_min, std::min(wb1, wb2), std::max(wb1, wb2), w_max};

  double total = 0.0;
  for (int seg = 0; seg < 3; ++seg) {
    const double w0 = bp[seg];
    const double w1 = bp[seg + 1];
    if (!(w1 > w0)) continue;
    const double wm = 0.5 * (w0 + w1);

    // Active limit branches on this subinterval.
    const bool lo_from_x = (2.0 * x.lo + wm) >= (2.0 * y.lo - wm);  // v_lo = 2p + w
    const bool hi_from_x = (2.0 * x.hi + wm) <= (2.0 * y.hi - wm);  // v_hi = 2q + w
    const double lam0 = lo_from_x ? 2.0 * x.lo : 2.0 * y.lo;
    const double lam1 = lo_from_x ? 1.0 : -1.0;
    const double nu0 = hi_from_x ? 2.0 * x.hi : 2.0 * y.hi;
    const double nu1 = hi_from_x ? 1.0 : -1.0;

    // u(y) - u(x) along each limit: affine A + B w, with A evaluated through
    // the endpoint-exact blends so touching panels cancel exactly.
    const double xl = lo_from_x ? x.lo : y.lo;
    const double al = y.extend(xl) - x.extend(xl);
    const double bl = lo_from_x ? mb : ma;
    const double xh = hi_from_x ? x.hi : y.hi;
    const double ah = y.extend(xh) - x.extend(xh);
    const double bh = hi_from_x ? mb : ma;

    // E_hi^3 - E_lo^3 = (v_hi - v_lo) * (E_hi^2 + E_hi E_lo + E_lo^2), which
    // stays finite for equal slopes.
    const double l0 = nu0 - lam0;
    const double l1 = nu1 - lam1;
    const double q0 = ah * ah + ah * al + al * al;
    const double q1 = 2.0 * ah * bh + ah * bl + al * bh + 2.0 * al * bl;
    const double q2 = bh * bh + bh * bl + bl * bl;

    const double a0 = l0 * q0 / 3.0;
    const double a1 = (l0 * q1 + l1 * q0) / 3.0;
    const double a2 = (l0 * q2 + l1 * q1) / 3.0;
    const double a3 = l1 * q2 / 3.0;

    double seg_sum = 0.0;
    seg_sum += power_term(a0, w0, w1, -2.0 * s);
    seg_sum += power_term(a1, w0, w1, 1.0 - 2.0 * s);
    seg_sum += power_term(a2, w0, w1, 2.0 - 2.0 * s);
    seg_sum += power_term(a3, w0, w1, 3.0 - 2.0 * s);
    total += 0.5 * seg_sum;
  }
  return total;
}

double self_pair(const Panel& x, double s) {
  const double m = x.slope();
  const double h = x.hi - x.lo;
  return 2.0 * m * m * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
}

}  // namespace

double fractional_seminorm_fiber(std::span<const double> values,
                                 std::span<const double> coords, double s) {
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgumentError("fractional_seminorm_fiber: s must lie in (0,1)");
  if (values.size() != coords.size() || values.size() < 2)
    throw InvalidArgumentError("fractional_seminorm_fiber: need >= 2 nodes");
  const std::size_t panels = values.size() - 1;
  std::vector<Panel> ps(panels);
  for (std::size_t i = 0; i < panels; ++i) {
    if (!(coords[i + 1] > coords[i]))
      throw InvalidArgumentError("fractional_seminorm_fiber: coords not increasing");
    ps[i] = {coords[i], coords[i + 1], values[i], values[i + 1]};
  }
  double total = 0.0;
  for (std::size_t a = 0; a < panels; ++a) {
    total += self_pair(ps[a], s);
    for (std::size_t b = a + 1; b < panels; ++b) total += 2.0 * cross_pair(ps[a], ps[b], s);
  }
  return total;
}

double fiber_l2_sq(std::span<const double> values, std::span<const double> coords) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double h = coords[i + 1] - coords[i];
    const double a = values[i], b = values[i + 1];
    total += h / 3.0 * (a * a + a * b + b * b);
  }
  return total;
}

double fiber_h1_semi_sq(std::span<const double> values, std::span<const double> coords) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double h = coords[i + 1] - coords[i];
    const double d = values[i + 1] - values[i];
    total += d * d / h;
  }
  return total;
}

double bochner_norm(const ThinMesh& m, const Vector& u, double s, int fiber_stride) {
  check_field(static_cast<Index>(m.vertices.size()), u, "bochner_norm");
  if (fiber_stride < 1)
    throw InvalidArgumentError("bochner_norm: fiber_stride must be >= 1");
  const bool valid_s = (s == 0.0) || (s == 1.0) || (s > 0.0 && s < 1.0);
  if (!valid_s) throw InvalidArgumentError("bochner_norm: s outside [0, 1]");

  std::vector<int> cols;
  for (int i = 0; i <= m.columns; i += fiber_stride) cols.push_back(i);
  if (cols.back() != m.columns) cols.push_back(m.columns);

  std::vector<double> vals, zs;
  auto fiber_norm_sq = [&](int col) {
    const auto& fiber = m.fibers[static_cast<std::size_t>(col)];
    vals.clear();
    zs.clear();
    for (int v : fiber) {
      vals.push_back(u[v]);
      zs.push_back(m.vertices[static_cast<std::size_t>(v)][1]);
    }
    double n = fiber_l2_sq(vals, zs);
    if (s == 0.0) return n;
    if (s == 1.0) return n + fiber_h1_semi_sq(vals, zs);
    return n + fractional_seminorm_fiber(vals, zs, s);
  };

  double prev_x = m.column_x[static_cast<std::size_t>(cols[0])];
  double prev_f = fiber_norm_sq(cols[0]);
  double integral = 0.0;
  for (std::size_t k = 1; k < cols.size(); ++k) {
    const double x = m.column_x[static_cast<std::size_t>(cols[k])];
    const double f = fiber_norm_sq(cols[k]);
    integral += 0.5 * (x - prev_x) * (prev_f + f);
    prev_x = x;
    prev_f = f;
  }
  return std::sqrt(integral);
}

template <class Mesh>
NormParts compute_norm_parts(const Mesh& m, const Vector& u) {
  check_field(static_cast<Index>(m.vertices.size()), u, "compute_norm_parts");
  NormParts p;
  for (const auto& t : m.triangles) {
    const ElementGeometry e = element_geometry(m, t);
    const double u0 = u[t[0]], u1 = u[t[1]], u2 = u[t[2]];
    // Exact P1 element integrals.
    p.l2_sq += e.area / 6.0 *
               (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u0 * u2 + u1 * u2);
    const double dx = u0 * e.gx[0] + u1 * e.gx[1] + u2 * e.gx[2];
    const double dy = u0 * e.gy[0] + u1 * e.gy[1] + u2 * e.gy[2];
    p.dx1_sq += e.area * dx * dx;
    p.dx2_sq += e.area * dy * dy;
  }
  return p;
}

template <class Mesh>
double l2_norm(const Mesh& m, const Vector& u) {
  return std::sqrt(compute_norm_parts(m, u).l2_sq);
}

double fiber_mean(const ThinMesh& m, const Vector& u, int column) {
  const auto& fiber = m.fibers[static_cast<std::size_t>(column)];
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < fiber.size(); ++j) {
    const double h = m.vertices[static_cast<std::size_t>(fiber[j + 1])][1] -
                     m.vertices[static_cast<std::size_t>(fiber[j])][1];
    integral += 0.5 * h * (u[fiber[j]] + u[fiber[j + 1]]);
  }
  return integral / m.top_x2[static_cast<std::size_t>(column)];
}

double eval_field1d(const Vector& u, double x) {
  const Index n = u.size() - 1;
  if (n < 1) throw InvalidArgumentError("eval_field1d: too few nodes");
  const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(n);
  const Index i = std::min<Index>(static_cast<Index>(pos), n - 1);
  const double t = pos - static_cast<double>(i);
  return u[i] * (1.0 - t) + u[i + 1] * t;
}

template SparseMatrix assemble_stiffness<ThinMesh>(const ThinMesh&, double, double);
template SparseMatrix assemble_stiffness<CellMesh>(const CellMesh&, double, double);
template SparseMatrix assemble_mass<ThinMesh>(const ThinMesh&);
template SparseMatrix assemble_mass<CellMesh>(const CellMesh&);
template SparseMatrix assemble_mass_on<ThinMesh>(const ThinMesh&, std::span<const int>);
template SparseMatrix assemble_mass_on<CellMesh>(const CellMesh&, std::span<const int>);
template NormParts compute_norm_parts<ThinMesh>(const ThinMesh&, const Vector&);
template NormParts compute_norm_parts<CellMesh>(const CellMesh&, const Vector&);
template double l2_norm<ThinMesh>(const ThinMesh&, const Vector&);
template double l2_norm<CellMesh>(const CellMesh&, const Vector&);

}  // namespace thinhomog
