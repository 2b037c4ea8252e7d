#include "thinhomog/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace thinhomog {

namespace {

using nlohmann::json;

ProfileKind profile_kind_from(const std::string& s) {
  if (s == "constant") return ProfileKind::Constant;
  if (s == "cosine") return ProfileKind::Cosine;
  if (s == "sine") return ProfileKind::Sine;
  if (s == "custom") return ProfileKind::Custom;
  throw InvalidArgumentError("config: unknown profile kind '" + s + "'");
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Constant: return "constant";
    case ProfileKind::Cosine: return "cosine";
    case ProfileKind::Sine: return "sine";
    case ProfileKind::Custom: return "custom";
  }
  return "constant";
}

NonlinearityBase base_from(const std::string& s) {
  if (s == "constant") return NonlinearityBase::Constant;
  if (s == "cubic") return NonlinearityBase::Cubic;
  if (s == "logistic") return NonlinearityBase::Logistic;
  if (s == "custom") return NonlinearityBase::Custom;
  throw InvalidArgumentError("config: unknown nonlinearity base '" + s + "'");
}

std::string to_string(NonlinearityBase b) {
  switch (b) {
    case NonlinearityBase::Constant: return "constant";
    case NonlinearityBase::Cubic: return "cubic";
    case NonlinearityBase::Logistic: return "logistic";
    case NonlinearityBase::Custom: return "custom";
  }
  return "constant";
}

ProfileSpec parse_profile(const json& j) {
  ProfileSpec p;
  p.kind = profile_kind_from(j.value("kind", std::string("constant")));
  p.period = j.value("period", 1.0);
  p.offset = j.value("offset", 1.0);
  p.amplitude = j.value("amplitude", 0.0);
  if (j.contains("samples")) p.samples = j["samples"].get<std::vector<double>>();
  p.validate();
  return p;
}

json profile_to_json(const ProfileSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["period"] = p.period;
  j["offset"] = p.offset;
  j["amplitude"] = p.amplitude;
  if (!p.samples.empty()) j["samples"] = p.samples;
  return j;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

void ExperimentConfig::validate() const {
  g.validate();
  h.validate();
  if (!(g.min_value() > 0.0))
    throw InvalidArgumentError("config: profile g must be strictly positive");
  if (h.min_value() < 0.0)
    throw InvalidArgumentError("config: profile h must be nonnegative");
  if (!(beta > 0.0)) throw InvalidArgumentError("config: beta must be positive");
  if (eps_list.empty()) throw InvalidArgumentError("config: eps_list is empty");
  for (double e : eps_list)
    if (!(e > 0.0)) throw InvalidArgumentError("config: eps values must be positive");
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
    if (!(eps_list[i] > eps_list[i + 1]))
      throw InvalidArgumentError("config: eps_list must be strictly decreasing");
  mesh.validate();
  if (!(newton_tol > 0.0) || !(cg_tol > 0.0))
    throw InvalidArgumentError("config: tolerances must be positive");
  if (newton_max_iter <= 0 || cg_max_iter <= 0)
    throw InvalidArgumentError("config: iteration limits must be positive");
  if (!(bound_r > 0.0)) throw InvalidArgumentError("config: R must be positive");
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgumentError("config: s must lie in (0,1)");
  if (fiber_stride < 1) throw InvalidArgumentError("config: fiber_stride must be >= 1");
  if (limit_intervals < 2)
    throw InvalidArgumentError("config: limit_intervals must be >= 2");
  if (cell_points_per_period < 4)
    throw InvalidArgumentError("config: cell_points_per_period must be >= 4");
  if (q0_override && !(*q0_override > 0.0))
    throw InvalidArgumentError("config: q0_override must be positive");
  if (concentration_mode != "quadrature" && concentration_mode != "solver")
    throw InvalidArgumentError("config: concentration_mode must be quadrature|solver");
  if (threads < 1) throw InvalidArgumentError("config: threads must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("config: JSON parse error: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("g")) c.g = parse_profile(j["g"]);
    if (j.contains("h")) c.h = parse_profile(j["h"]);
    c.beta = get_or(j, "beta", c.beta);
    if (j.contains("f")) {
      const auto& jf = j["f"];
      c.f = make_cutoff(base_from(jf.value("base", std::string("constant"))),
                        jf.value("cutoff_radius", 2.0), jf.value("value", 0.0),
                        jf.contains("coeffs") ? jf["coeffs"].get<std::vector<double>>()
                                              : std::vector<double>{});
    } else {
      c.f = make_cutoff(NonlinearityBase::Constant, c.bound_r, 0.0);
    }
    c.eps_list = get_or(j, "eps_list", c.eps_list);
    if (j.contains("mesh")) {
      const auto& jm = j["mesh"];
      c.mesh.points_per_period = jm.value("points_per_period", 10);
      c.mesh.bulk_rows = jm.value("bulk_rows", 6);
      c.mesh.strip_rows = jm.value("strip_rows", 3);
      c.mesh.refinement_level = jm.value("refinement_level", 0);
    }
    c.cell_points_per_period = get_or(j, "cell_points_per_period", c.cell_points_per_period);
    c.cell_rows = get_or(j, "cell_rows", c.cell_rows);
    c.s = get_or(j, "s", c.s);
    c.fiber_stride = get_or(j, "fiber_stride", c.fiber_stride);
    c.limit_intervals = get_or(j, "limit_intervals", c.limit_intervals);
    c.bound_r = get_or(j, "R", c.bound_r);
    c.multistart = get_or(j, "multistart", c.multistart);
    c.trials = get_or(j, "trials", c.trials);
    c.bl_trials = get_or(j, "bl_trials", c.bl_trials);
    c.upper_random_starts = get_or(j, "upper_random_starts", c.upper_random_starts);
    c.newton_tol = get_or(j, "newton_tol", c.newton_tol);
    c.newton_max_iter = get_or(j, "newton_max_iter", c.newton_max_iter);
    c.cg_tol = get_or(j, "cg_tol", c.cg_tol);
    c.cg_max_iter = get_or(j, "cg_max_iter", c.cg_max_iter);
    if (j.contains("q0_override") && !j["q0_override"].is_null())
      c.q0_override = j["q0_override"].get<double>();
    c.concentration_mode = get_or(j, "concentration_mode", c.concentration_mode);
    c.u0_expr = get_or(j, "u0_expr", c.u0_expr);
    c.phi_expr = get_or(j, "phi_expr", c.phi_expr);
    c.seed = get_or(j, "seed", c.seed);
    c.out_dir = get_or(j, "out_dir", c.out_dir);
    c.write_vtk = get_or(j, "write_vtk", c.write_vtk);
    c.threads = get_or(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("config: bad field: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["g"] = profile_to_json(c.g);
  j["h"] = profile_to_json(c.h);
  j["beta"] = c.beta;
  json jf;
  jf["base"] = to_string(c.f.base);
  jf["cutoff_radius"] = c.f.cutoff_radius;
  jf["value"] = c.f.constant_value;
  if (!c.f.coefficients.empty()) jf["coeffs"] = c.f.coefficients;
  j["f"] = jf;
  j["eps_list"] = c.eps_list;
  j["mesh"] = {{"points_per_period", c.mesh.points_per_period},
               {"bulk_rows", c.mesh.bulk_rows},
               {"strip_rows", c.mesh.strip_rows},
               {"refinement_level", c.mesh.refinement_level}};
  j["cell_points_per_period"] = c.cell_points_per_period;
  j["cell_rows"] = c.cell_rows;
  j["s"] = c.s;
  j["fiber_stride"] = c.fiber_stride;
  j["limit_intervals"] = c.limit_intervals;
  j["R"] = c.bound_r;
  j["multistart"] = c.multistart;
  j["trials"] = c.trials;
  j["bl_trials"] = c.bl_trials;
  j["upper_random_starts"] = c.upper_random_starts;
  j["newton_tol"] = c.newton_tol;
  j["newton_max_iter"] = c.newton_max_iter;
  j["cg_tol"] = c.cg_tol;
  j["cg_max_iter"] = c.cg_max_iter;
  if (c.q0_override)
    j["q0_override"] = *c.q0_override;
  else
    j["q0_override"] = nullptr;
  j["concentration_mode"] = c.concentration_mode;
  j["u0_expr"] = c.u0_expr;
  j["phi_expr"] = c.phi_expr;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["write_vtk"] = c.write_vtk;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

}  // namespace thinhomog
