#pragma once

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "hjreach/config.hpp"
#include "hjreach/io.hpp"
#include "hjreach/oracle.hpp"
#include "hjreach/solver.hpp"

namespace hjreach {

/// Output layout of `solve`: summary.json, masks/*.csv and minmaps/*.csv at
/// the record cadence, and a MANIFEST naming everything with the config hash.
struct SolveCommandOutcome {
  AutonomyEstimate autonomy;
  double wall_seconds = 0.0;
  long long steps = 0;
  std::vector<std::string> files;
};

inline SolveCommandOutcome run_solve_command(const RunConfig& cfg,
                                             const std::filesystem::path& out_dir) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<std::string> files;
  std::filesystem::create_directories(out_dir);
  bool complete = false;
  SolveCommandOutcome outcome;
  try {
    const HybridModel<2> model = build_model(cfg);
    const SolveResult<2> result =
        run_solver<2>(model, VehicleHamiltonian{VehicleParams{cfg.a_x, cfg.a_y, cfg.u_max}},
                      scheme_of(cfg));

    char name[64];
    for (const auto& rec : result.records) {
      std::snprintf(name, sizeof(name), "masks/mask_n%06d.csv", rec.n);
      write_mask_csv(out_dir / name, result.grid, rec.mask, hash);
      files.emplace_back(name);
      for (int q = 0; q < result.grid.num_modes; ++q) {
        std::snprintf(name, sizeof(name), "minmaps/minmap_n%06d_q%d.csv", rec.n, q);
        write_map_csv(out_dir / name, result.grid,
                      rec.min_maps[static_cast<std::size_t>(q)], hash);
        files.emplace_back(name);
      }
    }

    nlohmann::json summary;
    summary["config"] = config_to_json(cfg);
    summary["config_hash"] = hash;
    summary["grid"] = {{"nx", {result.grid.nx[0], result.grid.nx[1]}},
                       {"num_p", result.grid.num_p},
                       {"min_switch_index", result.grid.min_switch_index},
                       {"dt", result.grid.dt},
                       {"num_steps", result.grid.num_steps},
                       {"x_min", {result.grid.x_min[0], result.grid.x_min[1]}},
                       {"x_max", {result.grid.x_max[0], result.grid.x_max[1]}}};
    summary["dissipation"] = {result.dissipation[0], result.dissipation[1]};
    summary["autonomy"] = {{"reached", result.autonomy.reached},
                           {"value", result.autonomy.value},
                           {"bracket_lo", result.autonomy.bracket_lo},
                           {"bracket_hi", result.autonomy.bracket_hi}};
    summary["steps_taken"] = result.steps_taken;
    summary["wall_seconds"] = result.wall_seconds;
    write_json_file(out_dir / "summary.json", summary);
    files.emplace_back("summary.json");

    outcome.autonomy = result.autonomy;
    outcome.wall_seconds = result.wall_seconds;
    outcome.steps = result.steps_taken;
    outcome.files = files;
    complete = true;
  } catch (...) {
    write_manifest(out_dir, files, hash, false);
    throw;
  }
  write_manifest(out_dir, files, hash, true);
  return outcome;
}

inline std::vector<Vec<2>> default_table_instances() {
  return {{0.5, 0.5}, {0.3, 0.8}};
}

inline std::vector<ConvergenceRow> run_table_command(const RunConfig& cfg,
                                                     const std::vector<double>& dx_list,
                                                     const std::vector<Vec<2>>& instances,
                                                     const std::filesystem::path& out_dir) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> files;
  try {
    const auto rows = convergence_table(
        VehicleParams{cfg.a_x, cfg.a_y, cfg.u_max}, cfg.delta, instances, dx_list, scheme_of(cfg),
        Box<2>{{cfg.k_x_min, cfg.k_y_min}, {cfg.k_x_max, cfg.k_y_max}}, switch_policy_of(cfg));
    write_table_csv(out_dir / "table.csv", rows, hash);
    files.emplace_back("table.csv");
    write_text_file(out_dir / "table.txt", format_table_text(rows));
    files.emplace_back("table.txt");
    write_manifest(out_dir, files, hash, true);
    return rows;
  } catch (...) {
    write_manifest(out_dir, files, hash, false);
    throw;
  }
}

// ---------------------------------------------------------------------------
// verify: runtime property suites
// ---------------------------------------------------------------------------

namespace detail {

struct VerifyReporter {
  int failures = 0;
  void check(bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    if (!ok) ++failures;
  }
};

}  // namespace detail

/// Property checks over randomized inputs: flux consistency, one-step
/// monotonicity, value bounds plus the obstacle floor, the closed-form
/// autonomy against the fine-step simulator, and the sampled-trajectory
/// upper bound on the grid value. Returns the failure count.
inline int run_verify_command(const RunConfig& cfg, bool quick, std::uint64_t seed) {
  validate(cfg);
  detail::VerifyReporter rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-2.0, 2.0);
  const VehicleParams params{cfg.a_x, cfg.a_y, cfg.u_max};
  const HybridModel<2> model = build_model(cfg);

  // flux consistency against the exact Hamiltonian on coinciding gradients
  {
    Grid<2> probe = build_grid(GridGeometry{cfg.margin, cfg.dx, cfg.dp, cfg.horizon},
                               model.admissible_box, cfg.delta, 2);
    const Vec<2> c = dissipation_constants(model, probe, cfg.control_samples);
    const auto nh = make_numerical_hamiltonian<2>(VehicleHamiltonian{params}, c);
    const int trials = quick ? 200 : 1000;
    double worst = 0.0;
    for (int i = 0; i < trials; ++i) {
      const Vec<2> z{sym(rng), sym(rng)};
      const Vec<2> x{sym(rng), sym(rng)};
      for (int q = 0; q < 2; ++q)
        worst = std::max(worst, std::abs(nh.flux(0.0, x, q, z, z) -
                                         exact_hamiltonian(model, 0.0, x, q, z)));
    }
    rep.check(worst <= 1e-12, "flux consistency on coinciding gradients (worst " +
                                  format_double(worst) + ")");
  }

  // one-step monotonicity on ordered random fields
  {
    SchemeConfig small = scheme_of(cfg);
    small.dx = 0.06;
    small.horizon = 1.0;
    small.retain_fields = false;
    auto m = build_model(cfg);
    Grid<2> grid = build_grid(GridGeometry{small.margin, small.dx, small.dp, small.horizon},
                              m.admissible_box, m.lag_delta, m.num_modes);
    const Vec<2> c = dissipation_constants(m, grid, small.control_samples);
    finalize_time_step(grid, cfl_timestep(grid, c, small.cfl_factor));
    const auto nh = make_numerical_hamiltonian<2>(VehicleHamiltonian{params}, c);
    const auto boundary = boundary_mask(grid);
    std::vector<Vec<2>> coords(static_cast<std::size_t>(grid.x_node_count()));
    std::vector<double> obstacle(static_cast<std::size_t>(grid.x_node_count()));
    const LevelSetFn<2> phi_k(m.admissible_box, small.clip_bound);
    for (long long x = 0; x < grid.x_node_count(); ++x) {
      coords[static_cast<std::size_t>(x)] = grid.x_coord(x);
      obstacle[static_cast<std::size_t>(x)] = phi_k(coords[static_cast<std::size_t>(x)]);
    }
    std::vector<std::vector<int>> targets{{1}, {0}};
    const int pairs = quick ? 10 : 40;
    bool ok = true;
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> gap(0.0, 0.5);
    std::vector<double> scratch;
    for (int i = 0; i < pairs && ok; ++i) {
      ValueField lo = make_field(grid);
      ValueField hi = make_field(grid);
      for (std::size_t j = 0; j < lo.data.size(); ++j) {
        lo.data[j] = val(rng);
        hi.data[j] = std::min(1.0, lo.data[j] + gap(rng));
      }
      ValueField lo_next = make_field(grid);
      ValueField hi_next = make_field(grid);
      step(lo, lo_next, grid, nh, targets, obstacle, boundary, std::span<const Vec<2>>(coords), 0,
           small.clip_bound, 1, scratch);
      step(hi, hi_next, grid, nh, targets, obstacle, boundary, std::span<const Vec<2>>(coords), 0,
           small.clip_bound, 1, scratch);
      for (std::size_t j = 0; j < lo_next.data.size(); ++j)
        if (lo_next.data[j] > hi_next.data[j]) {
          ok = false;
          break;
        }
    }
    rep.check(ok, "one-step monotonicity on ordered random fields");
  }

  // bounds and obstacle floor on a short run
  {
    RunConfig short_cfg = cfg;
    short_cfg.dx = quick ? 0.05 : 0.025;
    short_cfg.horizon = quick ? 1.5 : 3.0;
    short_cfg.retain_fields = true;
    short_cfg.cadence = 5;
    const auto m = build_model(short_cfg);
    const auto result = run_solver<2>(m, VehicleHamiltonian{params}, scheme_of(short_cfg));
    const auto boundary = boundary_mask(result.grid);
    bool bounded = true;
    bool floored = true;
    for (const auto& snap : result.snapshots) {
      for (double v : snap.field.data) bounded = bounded && std::abs(v) <= short_cfg.clip_bound;
      if (snap.n == 0) continue;
      for (long long x = 0; x < snap.field.num_x && floored; ++x) {
        if (boundary[static_cast<std::size_t>(x)]) continue;
        for (int q = 0; q < snap.field.num_modes && floored; ++q)
          for (int k = 1; k <= snap.field.num_p; ++k)
            if (snap.field.at(x, q, k) <
                result.obstacle_values[static_cast<std::size_t>(x)]) {
              floored = false;
              break;
            }
      }
    }
    rep.check(bounded, "values stay inside the clip bound");
    rep.check(floored, "interior values respect the obstacle floor");

    // sampled-cost upper bound on the same run
    const int samples = quick ? 40 : 120;
    const auto draws = sample_admissible_cost(m, result, samples, seed);
    const double slack = 4.0 * (result.grid.dx[0] + result.grid.dt);
    int ok_count = 0;
    int usable = 0;
    for (const auto& smp : draws) {
      if (!smp.in_box) continue;
      ++usable;
      if (smp.grid_value <= smp.cost + slack) ++ok_count;
    }
    rep.check(usable > 0 && ok_count >= (usable * 99 + 99) / 100,
              "grid value below sampled trajectory cost (" + std::to_string(ok_count) + "/" +
                  std::to_string(usable) + ")");
  }

  // closed-form autonomy against the fine-step simulator
  {
    const int sets = quick ? 10 : 50;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool ok = std::abs(analytic_autonomy(0.3, 0.8, 0.1, 0.15, 0.07) -
                       simulate_best_policy(0.3, 0.8, VehicleParams{0.1, 0.15, 0.07})) <= 1e-3;
    ok = ok && std::abs(analytic_autonomy(0.5, 0.5, 0.1, 0.15, 0.07) -
                        simulate_best_policy(0.5, 0.5, VehicleParams{0.1, 0.15, 0.07})) <= 1e-3;
    for (int i = 0; i < sets && ok; ++i) {
      const double a_x = 0.05 + 0.25 * unit(rng);
      const double u_max = 0.9 * a_x * unit(rng);
      const double a_y = 0.05 + 0.25 * unit(rng);
      const double x0 = 0.05 + 0.95 * unit(rng);
      const double y0 = 0.05 + 0.95 * unit(rng);
      const double dt_fine = 1e-5;
      const double diff = std::abs(analytic_autonomy(x0, y0, a_x, a_y, u_max) -
                                   simulate_best_policy(x0, y0, VehicleParams{a_x, a_y, u_max},
                                                        dt_fine));
      ok = ok && diff <= 10.0 * dt_fine;
    }
    rep.check(ok, "closed-form autonomy matches the fine-step simulator");
  }

  return rep.failures;
}

}  // namespace hjreach
