// thinhomog command line: dispatches the experiment subcommands, writes CSV
// and VTK outputs atomically, and returns meaningful exit codes:
//   0 success, 2 solver non-convergence, 3 invalid config or geometry,
//   64 usage error.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "thinhomog/cell.hpp"
#include "thinhomog/config.hpp"
#include "thinhomog/converge.hpp"
#include "thinhomog/io.hpp"
#include "thinhomog/solvers.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace thinhomog;

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_manifest(const ExperimentConfig& cfg, const std::string& subcommand) {
  nlohmann::json j;
  j["toolkit"] = "thinhomog";
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["config"] = nlohmann::json::parse(config_to_json(cfg));
  write_text_atomic(out_path(cfg, subcommand + "_manifest.json"), j.dump(2) + "\n");
}

NewtonOptions newton_options(const ExperimentConfig& cfg) {
  NewtonOptions opt;
  opt.tol = cfg.newton_tol;
  opt.max_newton = cfg.newton_max_iter;
  opt.cg_tol = cfg.cg_tol;
  opt.cg_max_iter = cfg.cg_max_iter;
  return opt;
}

CellMesh make_cell_mesh(const ExperimentConfig& cfg) {
  MeshResolution res;
  res.points_per_period = cfg.cell_points_per_period;
  return build_cell_mesh(cfg.g, res, cfg.cell_rows);
}

double resolve_q0(const ExperimentConfig& cfg) {
  if (cfg.q0_override) return *cfg.q0_override;
  return solve_cell(make_cell_mesh(cfg), cfg.cg_tol, cfg.cg_max_iter).q0;
}

int cmd_cell(const ExperimentConfig& cfg) {
  const CellMesh m = make_cell_mesh(cfg);
  const CellSolution sol = solve_cell(m, cfg.cg_tol, cfg.cg_max_iter);
  CsvTable csv;
  csv.header = {"q0", "q0_energy", "q0_discrepancy", "compatibility_residual",
                "corrector_energy", "mean_X", "cg_iterations", "cg_residual"};
  csv.rows.push_back({format_float(sol.q0), format_float(sol.q0_energy),
                      format_float(sol.q0_discrepancy),
                      format_float(sol.compatibility_residual),
                      format_float(sol.corrector_energy), format_float(sol.mean_X),
                      std::to_string(sol.cg_iterations),
                      format_float(sol.cg_residual)});
  std::cout << csv.to_string();
  write_csv_atomic(out_path(cfg, "cell.csv"), csv);
  if (cfg.write_vtk)
    write_text_atomic(out_path(cfg, "cell_X.vtk"), vtk_string(m, {{"X", sol.X}}));
  write_manifest(cfg, "cell");
  return 0;
}

int cmd_solve_limit(const ExperimentConfig& cfg) {
  const HomogenizedData hd = make_homogenized_data(cfg.g, cfg.h, resolve_q0(cfg));
  const Vector init = field1d_from_expr(cfg.u0_expr, cfg.limit_intervals);
  const SolveResult r =
      newton_limit(cfg.limit_intervals, hd, cfg.f, init, newton_options(cfg));

  CsvTable summary;
  summary.header = {"q0", "f0_scale", "mean", "linf", "iterations",
                    "final_residual", "R_bound_ok"};
  summary.rows.push_back(
      {format_float(hd.q0), format_float(hd.f0_scale),
       format_float(field1d_mean(r.solution)), format_float(r.linf_norm),
       std::to_string(r.iterations), format_float(r.residual_history.back()),
       r.r_bound_ok ? "1" : "0"});
  std::cout << summary.to_string();
  write_csv_atomic(out_path(cfg, "solve_limit_summary.csv"), summary);

  CsvTable solution;
  solution.header = {"x", "u"};
  for (int i = 0; i <= cfg.limit_intervals; ++i)
    solution.rows.push_back(
        {format_float(static_cast<double>(i) / cfg.limit_intervals),
         format_float(r.solution[i])});
  write_csv_atomic(out_path(cfg, "solve_limit_solution.csv"), solution);
  write_manifest(cfg, "solve-limit");
  return 0;
}

int cmd_solve_eps(const ExperimentConfig& cfg) {
  const HomogenizedData hd = make_homogenized_data(cfg.g, cfg.h, resolve_q0(cfg));
  const Vector init1d = field1d_from_expr(cfg.u0_expr, cfg.limit_intervals);
  const SolveResult limit =
      newton_limit(cfg.limit_intervals, hd, cfg.f, init1d, newton_options(cfg));

  CsvTable csv;
  csv.header = {"eps", "N", "iterations", "final_residual", "linf",
                "h1eps_norm", "e_distance_L2", "max_fiber_mean_error"};
  int idx = 0;
  for (double eps : cfg.eps_list) {
    const ThinMesh m = build_thin_mesh(cfg.g, cfg.h, eps, cfg.beta, cfg.mesh);
    const SolveResult r =
        newton_eps(m, eps, cfg.f, extend_E(m, limit.solution), newton_options(cfg));
    double max_mean_err = 0.0;
    for (int i = 0; i <= m.columns; ++i) {
      const double target = eval_field1d(limit.solution, m.column_x[i]);
      max_mean_err = std::max(max_mean_err, std::abs(fiber_mean(m, r.solution, i) - target));
    }
    csv.rows.push_back(
        {format_float(eps), std::to_string(m.columns), std::to_string(r.iterations),
         format_float(r.residual_history.back()), format_float(r.linf_norm),
         format_float(std::sqrt(compute_norm_parts(m, r.solution).h1_eps_sq(eps))),
         format_float(e_distance(m, r.solution, limit.solution, EDistanceNorm::L2)),
         format_float(max_mean_err)});
    if (cfg.write_vtk)
      write_text_atomic(out_path(cfg, "u_eps_" + std::to_string(idx) + ".vtk"),
                        vtk_string(m, {{"u", r.solution}}));
    ++idx;
  }
  std::cout << csv.to_string();
  write_csv_atomic(out_path(cfg, "solve_eps.csv"), csv);
  write_manifest(cfg, "solve-eps");
  return 0;
}

int cmd_equilibria(const ExperimentConfig& cfg) {
  const HomogenizedData hd = make_homogenized_data(cfg.g, cfg.h, resolve_q0(cfg));
  const EquilibriaResult eq =
      find_equilibria_limit(cfg.limit_intervals, hd, cfg.f, cfg.bound_r,
                            cfg.multistart, newton_options(cfg));
  CsvTable csv;
  csv.header = {"index", "mean", "linf", "iterations", "min_abs_eigenvalue",
                "hyperbolic"};
  for (std::size_t k = 0; k < eq.equilibria.size(); ++k) {
    const SolveResult& r = eq.equilibria[k];
    const HyperbolicityReport hyp = hyperbolicity(r.solution, hd, cfg.f);
    csv.rows.push_back({std::to_string(k), format_float(field1d_mean(r.solution)),
                        format_float(r.linf_norm), std::to_string(r.iterations),
                        format_float(hyp.min_abs_eigenvalue),
                        hyp.hyperbolic ? "1" : "0"});
  }
  std::cout << csv.to_string();
  std::cout << "# starts=" << eq.total_starts << " failed=" << eq.failed_starts
            << " out_of_ball=" << eq.discarded_out_of_ball << "\n";
  write_csv_atomic(out_path(cfg, "equilibria.csv"), csv);
  write_manifest(cfg, "equilibria");
  return 0;
}

int cmd_converge(const ExperimentConfig& cfg) {
  const SemicontinuityReport rep = semicontinuity_experiment(cfg);
  write_csv_atomic(out_path(cfg, "converge.csv"), convergence_csv(rep.table));

  CsvTable summary;
  summary.header = {"equilibria", "all_hyperbolic", "newton_failures",
                    "lower_decreasing", "upper_decreasing", "lower_factor",
                    "upper_factor"};
  summary.rows.push_back({std::to_string(rep.equilibria_means.size()),
                          rep.all_hyperbolic ? "1" : "0",
                          std::to_string(rep.newton_failures),
                          rep.lower_decreasing ? "1" : "0",
                          rep.upper_decreasing ? "1" : "0",
                          format_float(rep.lower_factor),
                          format_float(rep.upper_factor)});
  std::cout << summary.to_string();
  write_csv_atomic(out_path(cfg, "converge_summary.csv"), summary);
  write_manifest(cfg, "converge");
  return 0;
}

int cmd_check_ineq(const ExperimentConfig& cfg) {
  const InequalityReport rep = check_trace_inequality(cfg);
  CsvTable csv;
  csv.header = {"eps", "N", "max_ratio_h1", "max_ratio_hs"};
  for (const auto& row : rep.per_eps)
    csv.rows.push_back({format_float(row.eps), std::to_string(row.mesh_columns),
                        format_float(row.max_ratio_h1),
                        format_float(row.max_ratio_hs)});
  std::cout << csv.to_string();
  write_csv_atomic(out_path(cfg, "check_ineq.csv"), csv);

  CsvTable summary;
  summary.header = {"spread_h1", "spread_hs", "bounded_h1", "bounded_hs"};
  summary.rows.push_back({format_float(rep.spread_h1), format_float(rep.spread_hs),
                          rep.bounded_h1 ? "1" : "0", rep.bounded_hs ? "1" : "0"});
  write_csv_atomic(out_path(cfg, "check_ineq_summary.csv"), summary);
  write_manifest(cfg, "check-ineq");
  return 0;
}

int cmd_check_concentration(const ExperimentConfig& cfg) {
  const ConvergenceTable table = check_concentration_limit(cfg);
  const CsvTable csv = convergence_csv(table);
  std::cout << csv.to_string();
  write_csv_atomic(out_path(cfg, "check_concentration.csv"), csv);
  write_manifest(cfg, "check-concentration");
  return 0;
}

int cmd_mesh_info(const ExperimentConfig& cfg) {
  CsvTable csv;
  csv.header = {"eps", "N", "vertices", "triangles", "strip_elements", "area",
                "strip_area", "min_angle_deg", "max_angle_deg", "min_area",
                "max_aspect_ratio"};
  int idx = 0;
  for (double eps : cfg.eps_list) {
    const ThinMesh m = build_thin_mesh(cfg.g, cfg.h, eps, cfg.beta, cfg.mesh);
    const QualityReport q = mesh_quality(m);
    csv.rows.push_back({format_float(eps), std::to_string(m.columns),
                        std::to_string(m.vertices.size()),
                        std::to_string(m.triangles.size()),
                        std::to_string(m.strip_elements.size()),
                        format_float(m.area()), format_float(m.strip_area()),
                        format_float(q.min_angle_deg), format_float(q.max_angle_deg),
                        format_float(q.min_area), format_float(q.max_aspect_ratio)});
    if (cfg.write_vtk)
      write_text_atomic(out_path(cfg, "mesh_" + std::to_string(idx) + ".vtk"),
                        vtk_string(m));
    ++idx;
  }
  std::cout << csv.to_string();
  write_csv_atomic(out_path(cfg, "mesh_info.csv"), csv);
  write_manifest(cfg, "mesh-info");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinhomog: thin-domain homogenization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_set = false, out_set = false, threads_set = false;

  const std::vector<std::pair<std::string, int (*)(const ExperimentConfig&)>> commands = {
      {"cell", cmd_cell},
      {"solve-eps", cmd_solve_eps},
      {"solve-limit", cmd_solve_limit},
      {"equilibria", cmd_equilibria},
      {"converge", cmd_converge},
      {"check-ineq", cmd_check_ineq},
      {"check-concentration", cmd_check_concentration},
      {"mesh-info", cmd_mesh_info}};

  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
    sub->add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "worker threads (overrides config)")
        ->each([&](const std::string&) { threads_set = true; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 64;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (out_set) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    if (threads_set) cfg.threads = threads;
    cfg.validate();
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(cfg);
    std::cerr << "no subcommand\n";
    return 64;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
