#include "thinhomog/converge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <thread>

#include "thinhomog/cell.hpp"

namespace thinhomog {

namespace {

// Static fan-out over independent indices; rethrows the first failure.
void run_indexed(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t mix_seed(std::uint64_t seed, int index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
}

constexpr double kGauss4Nodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
constexpr double kGauss4Weights[4] = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};

}  // namespace

Vector extend_E(const ThinMesh& m, const Vector& u0) {
  Vector out(static_cast<Index>(m.vertices.size()));
  for (int i = 0; i <= m.columns; ++i) {
    const double v = eval_field1d(u0, m.column_x[static_cast<std::size_t>(i)]);
    for (int idx : m.fibers[static_cast<std::size_t>(i)]) out[idx] = v;
  }
  return out;
}

double e_distance(const ThinMesh& m, const Vector& u_eps, const Vector& u0,
                  EDistanceNorm norm, double s, int fiber_stride) {
  const Vector diff = u_eps - extend_E(m, u0);
  if (norm == EDistanceNorm::L2) return l2_norm(m, diff);
  if (!(s > 0.5 && s < 1.0))
    throw InvalidArgumentError("e_distance: Hs norm needs s in (1/2, 1)");
  return bochner_norm(m, diff, s, fiber_stride);
}

double concentrated_integral(const ThinMesh& m, double eps, const Vector& u, double q) {
  return strip_integral_pow(m, eps, u, q);
}

void ConvergenceTable::add(double eps, int columns, std::string metric, double value) {
  if (!std::isfinite(value))
    throw Error("convergence table: non-finite value for metric " + metric);
  rows.push_back({eps, columns, std::move(metric), value});
}

std::vector<double> ConvergenceTable::series(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.metric == metric) out.push_back(r.value);
  return out;
}

bool strictly_decreasing_with_factor(const std::vector<double>& v, double min_factor) {
  if (v.size() < 3) return false;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] > v[i + 1])) return false;
  if (v.back() <= 0.0) return v.front() > 0.0;
  return v.front() / v.back() >= min_factor;
}

Vector field1d_from_expr(const std::string& expr, int n) {
  Vector u(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    if (expr == "one")
      u[i] = 1.0;
    else if (expr == "zero")
      u[i] = 0.0;
    else if (expr == "x")
      u[i] = x;
    else if (expr == "cospi")
      u[i] = std::cos(std::numbers::pi * x);
    else
      throw InvalidArgumentError("unknown field expression '" + expr + "'");
  }
  return u;
}

InequalityReport check_trace_inequality(const ExperimentConfig& cfg) {
  cfg.validate();
  const int ne = static_cast<int>(cfg.eps_list.size());
  InequalityReport rep;
  rep.per_eps.resize(static_cast<std::size_t>(ne));

  run_indexed(ne, cfg.threads, [&](int e_idx) {
    const double eps = cfg.eps_list[static_cast<std::size_t>(e_idx)];
    const ThinMesh m = build_thin_mesh(cfg.g, cfg.h, eps, cfg.beta, cfg.mesh);
    const Index nv = static_cast<Index>(m.vertices.size());

    std::mt19937_64 rng(mix_seed(cfg.seed, e_idx));
    std::normal_distribution<double> normal(0.0, 1.0);

    InequalityEpsRow row;
    row.eps = eps;
    row.mesh_columns = m.columns;

    auto record = [&](const Vector& u) {
      const double conc = strip_integral_pow(m, eps, u, 2.0);
      const double h1 = compute_norm_parts(m, u).h1_sq();
      const double hs = bochner_norm(m, u, cfg.s, cfg.fiber_stride);
      if (h1 > 1e-300) row.max_ratio_h1 = std::max(row.max_ratio_h1, conc / h1);
      if (hs > 1e-300) row.max_ratio_hs = std::max(row.max_ratio_hs, conc / (hs * hs));
    };

    for (int t = 0; t < cfg.trials; ++t) {
      Vector u(nv);
      for (Index i = 0; i < nv; ++i) u[i] = normal(rng);
      record(u);
    }
    // Adversarial boundary-layer profiles concentrated near the top boundary.
    for (int k = 0; k < cfg.bl_trials; ++k) {
      const double decay =
          cfg.bl_trials > 1 ? 0.25 * std::pow(16.0, static_cast<double>(k) /
                                                        (cfg.bl_trials - 1))
                            : 1.0;
      Vector u(nv);
      for (int col = 0; col <= m.columns; ++col) {
        const double top = m.top_x2[static_cast<std::size_t>(col)];
        for (int idx : m.fibers[static_cast<std::size_t>(col)]) {
          const double x2 = m.vertices[static_cast<std::size_t>(idx)][1];
          u[idx] = std::exp(-(top - x2) / (eps * decay));
        }
      }
      record(u);
    }
    rep.per_eps[static_cast<std::size_t>(e_idx)] = row;
  });

  double min_h1 = rep.per_eps.front().max_ratio_h1, max_h1 = min_h1;
  double min_hs = rep.per_eps.front().max_ratio_hs, max_hs = min_hs;
  for (const auto& r : rep.per_eps) {
    min_h1 = std::min(min_h1, r.max_ratio_h1);
    max_h1 = std::max(max_h1, r.max_ratio_h1);
    min_hs = std::min(min_hs, r.max_ratio_hs);
    max_hs = std::max(max_hs, r.max_ratio_hs);
  }
  rep.spread_h1 = max_h1 / std::max(min_h1, 1e-300);
  rep.spread_hs = max_hs / std::max(min_hs, 1e-300);
  rep.bounded_h1 =
      rep.per_eps.back().max_ratio_h1 <= 2.0 * rep.per_eps.front().max_ratio_h1;
  rep.bounded_hs =
      rep.per_eps.back().max_ratio_hs <= 2.0 * rep.per_eps.front().max_ratio_hs;
  return rep;
}

ConvergenceTable check_concentration_limit(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.limit_intervals;
  const Vector phi = field1d_from_expr(cfg.phi_expr, n);
  const double mu_h = mean_value(cfg.h);

  NewtonOptions opt;
  opt.tol = cfg.newton_tol;
  opt.max_newton = cfg.newton_max_iter;
  opt.cg_tol = cfg.cg_tol;
  opt.cg_max_iter = cfg.cg_max_iter;

  // Quadrature mode pairs E_eps u0 with u0 itself for an arbitrary u0; solver
  // mode pairs 2D solutions with the limit equilibrium they converge to, so
  // u0_expr only seeds the 1D Newton there.
  Vector u0 = field1d_from_expr(cfg.u0_expr, n);
  if (cfg.concentration_mode == "solver") {
    double q0 = 1.0;
    if (cfg.q0_override) {
      q0 = *cfg.q0_override;
    } else {
      MeshResolution cell_res;
      cell_res.points_per_period = cfg.cell_points_per_period;
      q0 = solve_cell(build_cell_mesh(cfg.g, cell_res, cfg.cell_rows), cfg.cg_tol,
                      cfg.cg_max_iter)
               .q0;
    }
    const HomogenizedData hd = make_homogenized_data(cfg.g, cfg.h, q0);
    u0 = newton_limit(n, hd, cfg.f, u0, opt).solution;
  }

  // mu_h int_0^1 f(u0) phi, Gauss per element of the 1D grid (exact for the
  // polynomial nonlinearities used here).
  double limit_value = 0.0;
  const double h1d = 1.0 / n;
  for (int e = 0; e < n; ++e) {
    for (int gq = 0; gq < 4; ++gq) {
      const double t = 0.5 * (1.0 + kGauss4Nodes[gq]);
      const double uq = u0[e] * (1.0 - t) + u0[e + 1] * t;
      const double pq = phi[e] * (1.0 - t) + phi[e + 1] * t;
      limit_value += 0.5 * h1d * kGauss4Weights[gq] * cfg.f.f(uq) * pq;
    }
  }
  limit_value *= mu_h;

  const int ne = static_cast<int>(cfg.eps_list.size());
  std::vector<std::array<double, 3>> slots(static_cast<std::size_t>(ne));
  std::vector<int> cols(static_cast<std::size_t>(ne));

  run_indexed(ne, cfg.threads, [&](int e_idx) {
    const double eps = cfg.eps_list[static_cast<std::size_t>(e_idx)];
    const ThinMesh m = build_thin_mesh(cfg.g, cfg.h, eps, cfg.beta, cfg.mesh);
    Vector u_eps = extend_E(m, u0);
    if (cfg.concentration_mode == "solver")
      u_eps = newton_eps(m, eps, cfg.f, u_eps, opt).solution;
    const double lhs = strip_integral_fu_phi(m, eps, cfg.f, u_eps, extend_E(m, phi));
    slots[static_cast<std::size_t>(e_idx)] = {lhs, std::abs(lhs - limit_value),
                                              limit_value};
    cols[static_cast<std::size_t>(e_idx)] = m.columns;
  });

  ConvergenceTable table;
  for (int i = 0; i < ne; ++i) {
    const double eps = cfg.eps_list[static_cast<std::size_t>(i)];
    table.add(eps, cols[static_cast<std::size_t>(i)], "concentration_lhs",
              slots[static_cast<std::size_t>(i)][0]);
    table.add(eps, cols[static_cast<std::size_t>(i)], "concentration_delta",
              slots[static_cast<std::size_t>(i)][1]);
    table.add(eps, cols[static_cast<std::size_t>(i)], "concentration_limit",
              slots[static_cast<std::size_t>(i)][2]);
  }
  return table;
}

namespace {

struct EpsSlot {
  int columns = 0;
  std::vector<double> lower_branch_l2;
  std::vector<double> lower_branch_hs;
  double lower_hausdorff = 0.0;
  double upper_hausdorff = 0.0;
  double h1eps_max = 0.0;
  int failures = 0;
  int newton_iters_max = 0;
};

}  // namespace

SemicontinuityReport semicontinuity_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  SemicontinuityReport rep;
  rep.eps = cfg.eps_list;

  double q0;
  if (cfg.q0_override) {
    q0 = *cfg.q0_override;
  } else {
    MeshResolution cell_res;
    cell_res.points_per_period = cfg.cell_points_per_period;
    const CellMesh cm = build_cell_mesh(cfg.g, cell_res, cfg.cell_rows);
    q0 = solve_cell(cm, cfg.cg_tol, cfg.cg_max_iter).q0;
  }
  const HomogenizedData hd = make_homogenized_data(cfg.g, cfg.h, q0);

  NewtonOptions opt;
  opt.tol = cfg.newton_tol;
  opt.max_newton = cfg.newton_max_iter;
  opt.cg_tol = cfg.cg_tol;
  opt.cg_max_iter = cfg.cg_max_iter;

  const EquilibriaResult eq = find_equilibria_limit(cfg.limit_intervals, hd, cfg.f,
                                                    cfg.bound_r, cfg.multistart, opt);
  if (eq.equilibria.empty())
    throw NonConvergenceError("semicontinuity: no limit equilibrium found", 0.0);
  for (const SolveResult& e : eq.equilibria) {
    rep.equilibria_means.push_back(field1d_mean(e.solution));
    const HyperbolicityReport hyp = hyperbolicity(e.solution, hd, cfg.f);
    rep.min_abs_eigenvalues.push_back(hyp.min_abs_eigenvalue);
    if (!hyp.hyperbolic) rep.all_hyperbolic = false;
  }

  const int nk = static_cast<int>(eq.equilibria.size());
  const int ne = static_cast<int>(cfg.eps_list.size());
  std::vector<EpsSlot> slots(static_cast<std::size_t>(ne));

  run_indexed(ne, cfg.threads, [&](int e_idx) {
    const double eps = cfg.eps_list[static_cast<std::size_t>(e_idx)];
    const ThinMesh m = build_thin_mesh(cfg.g, cfg.h, eps, cfg.beta, cfg.mesh);
    EpsSlot& slot = slots[static_cast<std::size_t>(e_idx)];
    slot.columns = m.columns;
    slot.lower_branch_l2.assign(static_cast<std::size_t>(nk),
                                std::numeric_limits<double>::quiet_NaN());
    slot.lower_branch_hs.assign(static_cast<std::size_t>(nk),
                                std::numeric_limits<double>::quiet_NaN());

    std::vector<Vector> found;
    auto add_found = [&](const SolveResult& r) {
      slot.newton_iters_max = std::max(slot.newton_iters_max, r.iterations);
      slot.h1eps_max = std::max(
          slot.h1eps_max, std::sqrt(compute_norm_parts(m, r.solution).h1_eps_sq(eps)));
      for (const Vector& kept : found)
        if ((kept - r.solution).cwiseAbs().maxCoeff() <= 1e-6) return;
      found.push_back(r.solution);
    };

    // Lower semicontinuity: shadow each limit equilibrium.
    for (int k = 0; k < nk; ++k) {
      const Vector& u0 = eq.equilibria[static_cast<std::size_t>(k)].solution;
      try {
        const SolveResult shadow = newton_eps(m, eps, cfg.f, extend_E(m, u0), opt);
        slot.lower_branch_l2[static_cast<std::size_t>(k)] =
            e_distance(m, shadow.solution, u0, EDistanceNorm::L2);
        slot.lower_branch_hs[static_cast<std::size_t>(k)] = e_distance(
            m, shadow.solution, u0, EDistanceNorm::Hs, cfg.s, cfg.fiber_stride);
        add_found(shadow);
      } catch (const Error&) {
        ++slot.failures;
      }
    }

    // Upper semicontinuity census: extra random starts.
    std::mt19937_64 rng(mix_seed(cfg.seed, e_idx));
    std::uniform_real_distribution<double> uni(-0.5 * cfg.bound_r, 0.5 * cfg.bound_r);
    for (int t = 0; t < cfg.upper_random_starts; ++t) {
      Vector init(static_cast<Index>(m.vertices.size()));
      for (Index i = 0; i < init.size(); ++i) init[i] = uni(rng);
      try {
        add_found(newton_eps(m, eps, cfg.f, init, opt));
      } catch (const Error&) {
        ++slot.failures;
      }
    }

    if (found.empty())
      throw NonConvergenceError("semicontinuity: no start converged at eps", eps);

    // dist_H(E eq0, found) and dist_H(found, E eq0) in L2.
    double lower = 0.0;
    for (int k = 0; k < nk; ++k) {
      const Vector& u0 = eq.equilibria[static_cast<std::size_t>(k)].solution;
      double best = std::numeric_limits<double>::max();
      for (const Vector& u : found)
        best = std::min(best, e_distance(m, u, u0, EDistanceNorm::L2));
      lower = std::max(lower, best);
    }
    double upper = 0.0;
    for (const Vector& u : found) {
      double best = std::numeric_limits<double>::max();
      for (int k = 0; k < nk; ++k)
        best = std::min(best, e_distance(m, u,
                                         eq.equilibria[static_cast<std::size_t>(k)].solution,
                                         EDistanceNorm::L2));
      upper = std::max(upper, best);
    }
    slot.lower_hausdorff = lower;
    slot.upper_hausdorff = upper;
  });

  for (int i = 0; i < ne; ++i) {
    const EpsSlot& slot = slots[static_cast<std::size_t>(i)];
    const double eps = cfg.eps_list[static_cast<std::size_t>(i)];
    for (int k = 0; k < nk; ++k) {
      const double l2 = slot.lower_branch_l2[static_cast<std::size_t>(k)];
      const double hs = slot.lower_branch_hs[static_cast<std::size_t>(k)];
      if (std::isfinite(l2))
        rep.table.add(eps, slot.columns, "lower_L2_branch" + std::to_string(k), l2);
      if (std::isfinite(hs))
        rep.table.add(eps, slot.columns, "lower_Hs_branch" + std::to_string(k), hs);
    }
    rep.table.add(eps, slot.columns, "lower_hausdorff_L2", slot.lower_hausdorff);
    rep.table.add(eps, slot.columns, "upper_hausdorff_L2", slot.upper_hausdorff);
    rep.table.add(eps, slot.columns, "h1eps_max", slot.h1eps_max);
    rep.table.add(eps, slot.columns, "newton_iters_max", slot.newton_iters_max);
    rep.lower_hausdorff.push_back(slot.lower_hausdorff);
    rep.upper_hausdorff.push_back(slot.upper_hausdorff);
    rep.newton_failures += slot.failures;
  }
  rep.lower_decreasing = strictly_decreasing_with_factor(rep.lower_hausdorff, 1.2);
  rep.upper_decreasing = strictly_decreasing_with_factor(rep.upper_hausdorff, 1.2);
  rep.lower_factor = rep.lower_hausdorff.front() / std::max(rep.lower_hausdorff.back(), 1e-300);
  rep.upper_factor = rep.upper_hausdorff.front() / std::max(rep.upper_hausdorff.back(), 1e-300);
  return rep;
}

}  // namespace thinhomog
