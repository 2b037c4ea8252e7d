#include "thinhomog/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thinhomog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_to_period(double x, double period) {
  double t = std::fmod(x, period);
  if (t < 0.0) t += period;
  return t;
}

// Catmull-Rom segment value/derivative for samples wrapped periodically.
struct CubicSegment {
  double a, b, c, d;  // value = a + b*t + c*t^2 + d*t^3, t in [0,1]
};

CubicSegment segment(const std::vector<double>& s, std::size_t i) {
  const std::size_t m = s.size();
  const double ym1 = s[(i + m - 1) % m];
  const double y0 = s[i];
  const double y1 = s[(i + 1) % m];
  const double y2 = s[(i + 2) % m];
  const double d0 = 0.5 * (y1 - ym1);
  const double d1 = 0.5 * (y2 - y0);
  return {y0, d0, 3.0 * (y1 - y0) - 2.0 * d0 - d1, 2.0 * (y0 - y1) + d0 + d1};
}

// Exact range of one cubic segment over t in [0,1]: endpoints plus interior
// roots of the derivative.
void segment_range(const CubicSegment& c, double& lo, double& hi) {
  auto consider = [&](double t) {
    const double v = c.a + t * (c.b + t * (c.c + t * c.d));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  consider(0.0);
  consider(1.0);
  // derivative b + 2c t + 3d t^2
  if (c.d != 0.0) {
    const double disc = 4.0 * c.c * c.c - 12.0 * c.d * c.b;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-2.0 * c.c + sq) / (6.0 * c.d), (-2.0 * c.c - sq) / (6.0 * c.d)})
        if (t > 0.0 && t < 1.0) consider(t);
    }
  } else if (c.c != 0.0) {
    const double t = -c.b / (2.0 * c.c);
    if (t > 0.0 && t < 1.0) consider(t);
  }
}

// Exact bound on |derivative| of one segment (quadratic on [0,1]).
double segment_slope_bound(const CubicSegment& c) {
  auto dv = [&](double t) { return std::abs(c.b + t * (2.0 * c.c + t * 3.0 * c.d)); };
  double m = std::max(dv(0.0), dv(1.0));
  if (c.d != 0.0) {
    const double t = -c.c / (3.0 * c.d);  // vertex of the quadratic
    if (t > 0.0 && t < 1.0) m = std::max(m, dv(t));
  }
  return m;
}

}  // namespace

void ProfileSpec::validate() const {
  if (!(period > 0.0)) throw InvalidArgumentError("profile: period must be positive");
  if (kind == ProfileKind::Custom && samples.size() < 2)
    throw InvalidArgumentError("profile: custom table needs at least 2 samples");
}

bool ProfileSpec::is_constant() const {
  switch (kind) {
    case ProfileKind::Constant:
      return true;
    case ProfileKind::Cosine:
    case ProfileKind::Sine:
      return amplitude == 0.0;
    case ProfileKind::Custom: {
      for (double v : samples)
        if (v != samples.front()) return false;
      return true;
    }
  }
  return false;
}

double eval_profile(const ProfileSpec& p, double x) {
  p.validate();
  const double t = wrap_to_period(x, p.period);
  switch (p.kind) {
    case ProfileKind::Constant:
      return p.offset;
    case ProfileKind::Cosine:
      return p.offset + p.amplitude * std::cos(kTwoPi * t / p.period);
    case ProfileKind::Sine:
      return p.offset + p.amplitude * std::sin(kTwoPi * t / p.period);
    case ProfileKind::Custom: {
      const std::size_t m = p.samples.size();
      const double u = t / p.period * static_cast<double>(m);
      std::size_t i = std::min(static_cast<std::size_t>(u), m - 1);
      const double local = u - static_cast<double>(i);
      const CubicSegment c = segment(p.samples, i);
      return c.a + local * (c.b + local * (c.c + local * c.d));
    }
  }
  throw InvalidArgumentError("profile: unknown kind");
}

double eval_profile_derivative(const ProfileSpec& p, double x) {
  p.validate();
  const double t = wrap_to_period(x, p.period);
  switch (p.kind) {
    case ProfileKind::Constant:
      return 0.0;
    case ProfileKind::Cosine:
      return -p.amplitude * kTwoPi / p.period * std::sin(kTwoPi * t / p.period);
    case ProfileKind::Sine:
      return p.amplitude * kTwoPi / p.period * std::cos(kTwoPi * t / p.period);
    case ProfileKind::Custom: {
      const std::size_t m = p.samples.size();
      const double h = p.period / static_cast<double>(m);
      const double u = t / p.period * static_cast<double>(m);
      std::size_t i = std::min(static_cast<std::size_t>(u), m - 1);
      const double local = u - static_cast<double>(i);
      const CubicSegment c = segment(p.samples, i);
      return (c.b + local * (2.0 * c.c + local * 3.0 * c.d)) / h;
    }
  }
  throw InvalidArgumentError("profile: unknown kind");
}

double ProfileSpec::min_value() const {
  validate();
  switch (kind) {
    case ProfileKind::Constant:
      return offset;
    case ProfileKind::Cosine:
    case ProfileKind::Sine:
      return offset - std::abs(amplitude);
    case ProfileKind::Custom: {
      double lo = samples[0], hi = samples[0];
      for (std::size_t i = 0; i < samples.size(); ++i)
        segment_range(segment(samples, i), lo, hi);
      return lo;
    }
  }
  return offset;
}

double ProfileSpec::max_value() const {
  validate();
  switch (kind) {
    case ProfileKind::Constant:
      return offset;
    case ProfileKind::Cosine:
    case ProfileKind::Sine:
      return offset + std::abs(amplitude);
    case ProfileKind::Custom: {
      double lo = samples[0], hi = samples[0];
      for (std::size_t i = 0; i < samples.size(); ++i)
        segment_range(segment(samples, i), lo, hi);
      return hi;
    }
  }
  return offset;
}

double ProfileSpec::derivative_bound() const {
  validate();
  switch (kind) {
    case ProfileKind::Constant:
      return 0.0;
    case ProfileKind::Cosine:
    case ProfileKind::Sine:
      return std::abs(amplitude) * kTwoPi / period;
    case ProfileKind::Custom: {
      const double h = period / static_cast<double>(samples.size());
      double m = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i)
        m = std::max(m, segment_slope_bound(segment(samples, i)) / h);
      return m;
    }
  }
  return 0.0;
}

double mean_value(const ProfileSpec& p) {
  p.validate();
  switch (p.kind) {
    case ProfileKind::Constant:
      return p.offset;
    case ProfileKind::Cosine:
    case ProfileKind::Sine:
      return p.offset;  // the oscillatory part integrates to zero
    case ProfileKind::Custom: {
      double sum = 0.0;
      for (double v : p.samples) sum += v;
      return sum / static_cast<double>(p.samples.size());
    }
  }
  throw InvalidArgumentError("profile: unknown kind");
}

namespace {

// Quintic transition sigma on [0,1]: sigma(0)=0, sigma'(0)=1, sigma''(0)=0,
// sigma(1)=1, sigma'(1)=0, sigma''(1)=0. Monotone on [0,1].
double quintic(double t) { return t + t * t * t * (4.0 + t * (-7.0 + 3.0 * t)); }
double quintic_d(double t) { return 1.0 + t * t * (12.0 + t * (-28.0 + 15.0 * t)); }
double quintic_dd(double t) { return t * (24.0 + t * (-84.0 + 60.0 * t)); }

// C^2 clamp s(u): identity on [-R, R], saturates at +-(R+1).
struct Clamp {
  double s, ds, dds;
};

Clamp clamp_map(double u, double r) {
  const double a = std::abs(u);
  if (a <= r) return {u, 1.0, 0.0};
  const double sign = (u < 0.0) ? -1.0 : 1.0;
  if (a >= r + 1.0) return {sign * (r + 1.0), 0.0, 0.0};
  const double t = a - r;
  return {sign * (r + quintic(t)), quintic_d(t), sign * quintic_dd(t)};
}

double base_f(const Nonlinearity& n, double u) {
  switch (n.base) {
    case NonlinearityBase::Constant:
      return n.constant_value;
    case NonlinearityBase::Cubic:
      return u - u * u * u;
    case NonlinearityBase::Logistic:
      return u * (1.0 - u);
    case NonlinearityBase::Custom: {
      double v = 0.0;
      for (std::size_t i = n.coefficients.size(); i-- > 0;)
        v = v * u + n.coefficients[i];
      return v;
    }
  }
  return 0.0;
}

double base_df(const Nonlinearity& n, double u) {
  switch (n.base) {
    case NonlinearityBase::Constant:
      return 0.0;
    case NonlinearityBase::Cubic:
      return 1.0 - 3.0 * u * u;
    case NonlinearityBase::Logistic:
      return 1.0 - 2.0 * u;
    case NonlinearityBase::Custom: {
      double v = 0.0;
      for (std::size_t i = n.coefficients.size(); i-- > 1;)
        v = v * u + static_cast<double>(i) * n.coefficients[i];
      return v;
    }
  }
  return 0.0;
}

double base_ddf(const Nonlinearity& n, double u) {
  switch (n.base) {
    case NonlinearityBase::Constant:
      return 0.0;
    case NonlinearityBase::Cubic:
      return -6.0 * u;
    case NonlinearityBase::Logistic:
      return -2.0;
    case NonlinearityBase::Custom: {
      double v = 0.0;
      for (std::size_t i = n.coefficients.size(); i-- > 2;)
        v = v * u + static_cast<double>(i * (i - 1)) * n.coefficients[i];
      return v;
    }
  }
  return 0.0;
}

}  // namespace

double Nonlinearity::f(double u) const {
  return base_f(*this, clamp_map(u, cutoff_radius).s);
}

double Nonlinearity::df(double u) const {
  const Clamp c = clamp_map(u, cutoff_radius);
  return base_df(*this, c.s) * c.ds;
}

double Nonlinearity::ddf(double u) const {
  const Clamp c = clamp_map(u, cutoff_radius);
  return base_ddf(*this, c.s) * c.ds * c.ds + base_df(*this, c.s) * c.dds;
}

double Nonlinearity::sup_abs_f() const {
  // f(u) = f_base(s(u)) with s ranging over [-R-1, R+1]: scan that interval.
  double m = 0.0;
  const int n = 4096;
  const double r1 = cutoff_radius + 1.0;
  for (int i = 0; i <= n; ++i)
    m = std::max(m, std::abs(base_f(*this, -r1 + 2.0 * r1 * i / n)));
  return m;
}

Nonlinearity make_cutoff(NonlinearityBase base, double cutoff_radius,
                         double constant_value, std::vector<double> coefficients) {
  if (!(cutoff_radius > 0.0))
    throw InvalidArgumentError("make_cutoff: cutoff radius must be positive");
  Nonlinearity n;
  n.base = base;
  n.cutoff_radius = cutoff_radius;
  n.constant_value = constant_value;
  n.coefficients = std::move(coefficients);
  return n;
}

HomogenizedData make_homogenized_data(const ProfileSpec& g, const ProfileSpec& h,
                                      double q0) {
  if (!(q0 > 0.0)) throw InvalidArgumentError("homogenized data: q0 must be positive");
  if (!(g.min_value() > 0.0))
    throw InvalidArgumentError("homogenized data: g must be strictly positive");
  if (h.min_value() < 0.0)
    throw InvalidArgumentError("homogenized data: h must be nonnegative");
  HomogenizedData hd;
  hd.q0 = q0;
  hd.mu_g = mean_value(g);
  hd.mu_h = mean_value(h);
  hd.cell_area = g.period * hd.mu_g;
  hd.f0_scale = g.period * hd.mu_h / hd.cell_area;
  return hd;
}

}  // namespace thinhomog
