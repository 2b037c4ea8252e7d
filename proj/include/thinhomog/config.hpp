// JSON experiment configuration: one flat object with at most one level of
// nesting, hand-editable and diffable.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinhomog/mesh.hpp"
#include "thinhomog/profiles.hpp"

namespace thinhomog {

struct ExperimentConfig {
  ProfileSpec g{ProfileKind::Constant, 1.0, 1.0, 0.0, {}};
  ProfileSpec h{ProfileKind::Constant, 1.0, 1.0, 0.0, {}};
  double beta = 1.0;
  Nonlinearity f;
  std::vector<double> eps_list = {0.2, 0.1, 0.05};
  MeshResolution mesh;
  int cell_points_per_period = 64;
  int cell_rows = 0;  // 0 = auto
  double s = 0.75;
  int fiber_stride = 4;
  int limit_intervals = 200;
  double bound_r = 2.0;
  int multistart = 9;
  int trials = 50;
  int bl_trials = 10;
  int upper_random_starts = 3;
  double newton_tol = 1e-11;
  int newton_max_iter = 30;
  double cg_tol = 1e-10;
  int cg_max_iter = 50000;
  std::optional<double> q0_override;
  std::string concentration_mode = "quadrature";  // or "solver"
  std::string u0_expr = "one";                    // one | zero | x
  std::string phi_expr = "one";                   // one | x | cospi
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  bool write_vtk = false;
  int threads = 1;

  /// Throws InvalidArgumentError on violated invariants (eps_list must be
  /// strictly decreasing, tolerances positive, ...).
  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// Fully resolved config echoed into the run manifest.
std::string config_to_json(const ExperimentConfig& c);

}  // namespace thinhomog
