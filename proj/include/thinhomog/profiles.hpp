// Periodic boundary/strip profiles, the reaction nonlinearity with its C^2
// cutoff, and the homogenized data derived from them.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thinhomog/errors.hpp"

namespace thinhomog {

enum class ProfileKind { Constant, Cosine, Sine, Custom };

/// One periodic profile g or h:
///   constant: offset
///   cosine:   offset + amplitude * cos(2 pi x / period)
///   sine:     offset + amplitude * sin(2 pi x / period)
///   custom:   periodic cubic (Catmull-Rom) interpolation of uniform samples
///             over one period
struct ProfileSpec {
  ProfileKind kind = ProfileKind::Constant;
  double period = 1.0;
  double offset = 1.0;
  double amplitude = 0.0;
  std::vector<double> samples;  // custom kind only; sample i at x = i*period/m

  /// Throws InvalidArgumentError if the spec cannot be evaluated
  /// (non-positive period, custom table with fewer than 2 samples).
  void validate() const;

  double min_value() const;
  double max_value() const;
  /// Bound on |p'| over one period (assumption of bounded derivative).
  double derivative_bound() const;
  bool is_constant() const;
};

double eval_profile(const ProfileSpec& p, double x);
double eval_profile_derivative(const ProfileSpec& p, double x);

/// Exact period average for analytic kinds; trapezoid over the samples for
/// custom tables (exact for the periodic cubic interpolant).
double mean_value(const ProfileSpec& p);

enum class NonlinearityBase { Constant, Cubic, Logistic, Custom };

/// C^2 nonlinearity f with evaluators for f, f', f''. make_cutoff composes a
/// base with a C^2 monotone clamp s: identity on [-R, R], constant outside
/// [-R-1, R+1], quintic transition in between, so f is bounded with bounded
/// derivatives and untouched on the working ball |u| <= R.
struct Nonlinearity {
  NonlinearityBase base = NonlinearityBase::Constant;
  double cutoff_radius = 1.0;
  double constant_value = 0.0;        // Constant base
  std::vector<double> coefficients;   // Custom base: polynomial, ascending powers

  double f(double u) const;
  double df(double u) const;
  double ddf(double u) const;

  double sup_abs_f() const;  // sup |f| over all of R (range clamps to |u|<=R+1)
};

Nonlinearity make_cutoff(NonlinearityBase base, double cutoff_radius,
                         double constant_value = 0.0,
                         std::vector<double> coefficients = {});

/// Homogenized data of the limit problem: -q0 u'' + u = f0_scale * f(u).
struct HomogenizedData {
  double q0 = 1.0;
  double mu_g = 1.0;
  double mu_h = 1.0;
  double cell_area = 1.0;  // |Y*| = L_g * mu_g
  double f0_scale = 1.0;   // L_g * mu_h / |Y*| = mu_h / mu_g
};

/// Builds homogenized data from the profiles; q0 must come from a cell solve
/// (or be overridden for synthetic scenarios).
HomogenizedData make_homogenized_data(const ProfileSpec& g, const ProfileSpec& h,
                                      double q0);

}  // namespace thinhomog
