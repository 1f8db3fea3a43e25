#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hjreach/grid.hpp"
#include "hjreach/hamiltonian.hpp"
#include "hjreach/hybrid_model.hpp"
#include "hjreach/level_set.hpp"
#include "hjreach/parallel.hpp"
#include "hjreach/reachability.hpp"

namespace hjreach {

struct SchemeConfig {
  double cfl_factor = 0.9;
  double clip_bound = 1.0;  // saturation of the level-set data and of the scheme
  double horizon = 8.0;
  double dx = 0.025;
  double dp = 0.05;
  double margin = 0.1;
  int control_samples = 50;
  double reach_tol = 0.0;
  int record_cadence = 20;   // steps between full mask/map records; <=0 records ends only
  bool retain_fields = false;  // keep field snapshots at record times
  int workers = 1;             // <=0 means hardware concurrency
};

namespace detail {

/// Explicit obstacle update of one interior node: upwind transport in the
/// lock variable, Lax-Friedrichs flux in x, floor at the obstacle, then
/// saturation. Shared verbatim by the batch stepper and the single-node entry
/// point so both paths are bit-identical.
template <int D, class HamFn>
inline double update_interior_node(const double* row, const double* row_below, long long x,
                                   const std::array<long long, D>& strides, const Vec<D>& dx,
                                   double dp, double dt, double time,
                                   const NumericalHamiltonian<D, HamFn>& nh, const Vec<D>& coords,
                                   int q, double obstacle_value, double clip_bound) {
  const double center = row[x];
  Vec<D> backward{};
  Vec<D> forward{};
  for (int j = 0; j < D; ++j) {
    backward[j] = (center - row[x - strides[j]]) / dx[j];
    forward[j] = (row[x + strides[j]] - center) / dx[j];
  }
  const double lock_advection = (center - row_below[x]) / dp;
  const double updated =
      center - dt * (lock_advection + nh.flux(time, coords, q, backward, forward));
  return std::clamp(std::max(obstacle_value, updated), -clip_bound, clip_bound);
}

/// Non-local switch value at lock zero: infimum of the previous time level
/// over admissible post-lag lock levels and switch target modes. Saturates at
/// the clip bound when no switch is representable.
inline double switch_row_min(const ValueField& prev, long long x, std::span<const int> targets,
                             int min_switch_index, double clip_bound) {
  if (targets.empty() || min_switch_index > prev.num_p) return clip_bound;
  double best = std::numeric_limits<double>::infinity();
  for (int q_pre : targets)
    for (int k = min_switch_index; k <= prev.num_p; ++k)
      best = std::min(best, prev.at(x, q_pre, k));
  return best;
}

}  // namespace detail

/// Initial time level: pointwise max of the target and obstacle level-set
/// functions, identical across modes and lock levels.
template <int D>
inline ValueField initialize(const Grid<D>& grid, const LevelSetFn<D>& target,
                             const LevelSetFn<D>& obstacle) {
  ValueField field = make_field(grid);
  std::vector<double> base(static_cast<std::size_t>(grid.x_node_count()));
  for (long long x = 0; x < grid.x_node_count(); ++x) {
    const Vec<D> p = grid.x_coord(x);
    base[static_cast<std::size_t>(x)] = std::max(target(p), obstacle(p));
  }
  for (int q = 0; q < grid.num_modes; ++q)
    for (int k = 0; k <= grid.num_p; ++k)
      std::copy(base.begin(), base.end(), field.row(q, k).begin());
  return field;
}

/// Single-node obstacle update (lock level k >= 1, interior x node).
template <int D, class HamFn>
inline double interior_update(const ValueField& prev, const Grid<D>& grid,
                              const NumericalHamiltonian<D, HamFn>& nh, double obstacle_value,
                              const std::array<int, D>& idx, int q, int k, int n,
                              double clip_bound) {
  if (k < 1 || k > grid.num_p) throw std::out_of_range("interior update needs lock level k >= 1");
  if (grid.is_x_boundary(idx)) throw std::out_of_range("interior update needs an interior x node");
  std::array<long long, D> strides{};
  for (int j = 0; j < D; ++j) strides[j] = grid.x_stride(j);
  const long long x = grid.flatten_x(idx);
  return detail::update_interior_node<D, HamFn>(
      prev.data.data() + prev.row_offset(q, k), prev.data.data() + prev.row_offset(q, k - 1), x,
      strides, grid.dx, grid.dp, grid.dt, grid.time_at(n), nh, grid.x_coord(idx), q,
      obstacle_value, clip_bound);
}

/// Single-node switch-row value (lock level k = 0).
template <int D>
inline double switch_row_update(const ValueField& prev, const Grid<D>& grid,
                                const HybridModel<D>& model, long long x_flat, int q,
                                double clip_bound) {
  check_mode(model, q);
  std::vector<int> targets;
  for (int w : model.switch_decisions[static_cast<std::size_t>(q)]) {
    const int pre = eval_switch(model, w, q);
    if (std::find(targets.begin(), targets.end(), pre) == targets.end()) targets.push_back(pre);
  }
  return detail::switch_row_min(prev, x_flat, targets, grid.min_switch_index, clip_bound);
}

/// One explicit time step: switch rule on the k = 0 rows, obstacle update on
/// interior rows, clip-bound Dirichlet data on the x boundary ring. Reads
/// only `prev`, writes only `next`; the result does not depend on the worker
/// count.
template <int D, class HamFn>
inline void step(const ValueField& prev, ValueField& next, const Grid<D>& grid,
                 const NumericalHamiltonian<D, HamFn>& nh,
                 std::span<const std::vector<int>> switch_targets,
                 std::span<const double> obstacle_values, std::span<const std::uint8_t> x_boundary,
                 std::span<const Vec<D>> coords, int n, double clip_bound, int workers,
                 std::vector<double>& switch_scratch) {
  if (grid.dt > cfl_timestep(grid, nh.dissipation, 1.0) * (1.0 + 1e-12))
    throw std::runtime_error("time step violates the CFL bound; refusing to step");

  const long long num_x = prev.num_x;
  const int levels = grid.p_level_count();
  const double time = grid.time_at(n);
  std::array<long long, D> strides{};
  for (int j = 0; j < D; ++j) strides[j] = grid.x_stride(j);

  bool any_switch = grid.min_switch_index <= grid.num_p;
  bool any_target = false;
  for (const auto& t : switch_targets) any_target = any_target || !t.empty();
  any_switch = any_switch && any_target;

  // Pass 1: per-mode minimum over admissible lock levels, used by every
  // k = 0 row. Each x slot is reduced serially in a fixed order.
  if (any_switch) {
    switch_scratch.assign(static_cast<std::size_t>(grid.num_modes) * num_x,
                          std::numeric_limits<double>::infinity());
    parallel_for(num_x, workers, [&](long long begin, long long end) {
      for (int q = 0; q < grid.num_modes; ++q) {
        double* buf = switch_scratch.data() + static_cast<std::size_t>(q) * num_x;
        for (int k = grid.min_switch_index; k <= grid.num_p; ++k) {
          const double* row = prev.data.data() + prev.row_offset(q, k);
          for (long long x = begin; x < end; ++x) buf[x] = std::min(buf[x], row[x]);
        }
      }
    });
  }

  // Pass 2: every (mode, lock) row over all x nodes.
  parallel_for(grid.row_count(), workers, [&](long long row_begin, long long row_end) {
    for (long long r = row_begin; r < row_end; ++r) {
      const int q = static_cast<int>(r / levels);
      const int k = static_cast<int>(r % levels);
      double* out = next.data.data() + next.row_offset(q, k);
      if (k == 0) {
        const auto& targets = switch_targets[static_cast<std::size_t>(q)];
        for (long long x = 0; x < num_x; ++x) {
          if (x_boundary[static_cast<std::size_t>(x)]) {
            out[x] = clip_bound;
            continue;
          }
          if (!any_switch || targets.empty()) {
            out[x] = clip_bound;
            continue;
          }
          double best = std::numeric_limits<double>::infinity();
          for (int q_pre : targets)
            best = std::min(best, switch_scratch[static_cast<std::size_t>(q_pre) * num_x + x]);
          out[x] = best;
        }
      } else {
        const double* row = prev.data.data() + prev.row_offset(q, k);
        const double* row_below = prev.data.data() + prev.row_offset(q, k - 1);
        for (long long x = 0; x < num_x; ++x) {
          if (x_boundary[static_cast<std::size_t>(x)]) {
            out[x] = clip_bound;
            continue;
          }
          out[x] = detail::update_interior_node<D, HamFn>(
              row, row_below, x, strides, grid.dx, grid.dp, grid.dt, time, nh,
              coords[static_cast<std::size_t>(x)], q, obstacle_values[static_cast<std::size_t>(x)],
              clip_bound);
        }
      }
    }
  });
}

struct StepRecord {
  int n = 0;
  double time = 0.0;
  std::vector<std::uint8_t> mask;
  std::vector<std::vector<double>> min_maps;
  bool empty = false;
};

struct FieldSnapshot {
  int n = 0;
  double time = 0.0;
  ValueField field;
};

template <int D>
struct SolveResult {
  Grid<D> grid;
  Vec<D> dissipation{};
  std::vector<double> times;                  // s_0 .. s_last, one per computed level
  std::vector<std::uint8_t> empty_per_step;   // emptiness of the reachable mask per level
  std::vector<StepRecord> records;            // full mask/map records at the cadence
  std::vector<FieldSnapshot> snapshots;       // optional retained fields
  AutonomyEstimate autonomy;
  double wall_seconds = 0.0;
  long long steps_taken = 0;
  std::vector<double> obstacle_values;  // obstacle level set at the x nodes
  std::vector<std::uint8_t> in_k;       // obstacle <= 0 per x node
  LevelSetFn<D> target_fn;
  LevelSetFn<D> obstacle_fn;
};

/// Full run: build the lattice, bound the dissipation, fix the CFL step,
/// march from the level-set initial data, and stop at the first time level
/// whose reachable mask is empty. Deterministic for a fixed configuration.
template <int D, class HamFn>
SolveResult<D> run_solver(const HybridModel<D>& model, HamFn hamiltonian,
                          const SchemeConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!(cfg.clip_bound > 0.0)) throw std::invalid_argument("clip bound must be positive");
  if (!(cfg.reach_tol >= 0.0)) throw std::invalid_argument("reach tolerance must be nonnegative");
  if (cfg.horizon < model.lag_delta)
    std::cerr << "warning: horizon " << cfg.horizon << " is shorter than the switch lag "
              << model.lag_delta << "; switching never unlocks\n";

  SolveResult<D> result;
  result.grid = build_grid(GridGeometry{cfg.margin, cfg.dx, cfg.dp, cfg.horizon},
                           model.admissible_box, model.lag_delta, model.num_modes);
  Grid<D>& grid = result.grid;
  result.dissipation = dissipation_constants(model, grid, cfg.control_samples);
  finalize_time_step(grid, cfl_timestep(grid, result.dissipation, cfg.cfl_factor));

  Ball<D> initial = model.initial_ball;
  if (!(initial.radius > 0.0)) initial.radius = 2.0 * cfg.dx;
  result.target_fn = LevelSetFn<D>(initial, cfg.clip_bound);
  result.obstacle_fn = LevelSetFn<D>(model.admissible_box, cfg.clip_bound);

  const long long num_x = grid.x_node_count();
  std::vector<Vec<D>> coords(static_cast<std::size_t>(num_x));
  result.obstacle_values.resize(static_cast<std::size_t>(num_x));
  result.in_k.resize(static_cast<std::size_t>(num_x));
  for (long long x = 0; x < num_x; ++x) {
    coords[static_cast<std::size_t>(x)] = grid.x_coord(x);
    const double phi = result.obstacle_fn(coords[static_cast<std::size_t>(x)]);
    result.obstacle_values[static_cast<std::size_t>(x)] = phi;
    result.in_k[static_cast<std::size_t>(x)] = phi <= 0.0 ? 1 : 0;
  }
  const std::vector<std::uint8_t> x_boundary = boundary_mask(grid);

  std::vector<std::vector<int>> switch_targets(static_cast<std::size_t>(model.num_modes));
  for (int q = 0; q < model.num_modes; ++q)
    for (int w : model.switch_decisions[static_cast<std::size_t>(q)]) {
      const int pre = eval_switch(model, w, q);
      auto& t = switch_targets[static_cast<std::size_t>(q)];
      if (std::find(t.begin(), t.end(), pre) == t.end()) t.push_back(pre);
    }

  const auto nh = make_numerical_hamiltonian<D>(std::move(hamiltonian), result.dissipation);
  const int workers = resolve_workers(cfg.workers);

  ValueField current = initialize(grid, result.target_fn, result.obstacle_fn);
  ValueField next = make_field(grid);
  std::vector<double> switch_scratch;

  auto check_finite = [&](const ValueField& f, int n) {
    for (double v : f.data)
      if (!std::isfinite(v))
        throw std::runtime_error("non-finite value at time level " + std::to_string(n) +
                                 "; aborting");
  };
  auto record_full = [&](const ValueField& f, int n) {
    check_finite(f, n);
    StepRecord rec;
    rec.n = n;
    rec.time = grid.time_at(n);
    rec.mask = reachable_mask(f, result.in_k, cfg.reach_tol);
    rec.min_maps = min_value_maps(f);
    rec.empty = std::find(rec.mask.begin(), rec.mask.end(), std::uint8_t{1}) == rec.mask.end();
    result.records.push_back(std::move(rec));
    if (cfg.retain_fields) result.snapshots.push_back(FieldSnapshot{n, grid.time_at(n), f});
  };

  long long hint = 0;
  auto probe_empty = [&](const ValueField& f) {
    const long long found = find_reachable_node(f, result.in_k, cfg.reach_tol, hint);
    if (found >= 0) hint = found;
    return found < 0;
  };

  result.times.push_back(0.0);
  result.empty_per_step.push_back(probe_empty(current) ? 1 : 0);
  record_full(current, 0);
  bool stopped_empty = result.empty_per_step.back() != 0;

  int n = 0;
  while (!stopped_empty && n < grid.num_steps) {
    step(current, next, grid, nh, switch_targets, result.obstacle_values, x_boundary,
         std::span<const Vec<D>>(coords), n, cfg.clip_bound, workers, switch_scratch);
    std::swap(current, next);
    ++n;
    result.times.push_back(grid.time_at(n));
    const bool empty = probe_empty(current);
    result.empty_per_step.push_back(empty ? 1 : 0);
    const bool cadence_hit = cfg.record_cadence > 0 && n % cfg.record_cadence == 0;
    if (empty || cadence_hit || n == grid.num_steps) record_full(current, n);
    stopped_empty = empty;
  }
  result.steps_taken = n;
  result.autonomy = autonomy(result.empty_per_step, result.times);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

/// Convenience entry point that picks the model's closed-form Hamiltonian
/// when present and falls back to control sampling.
template <int D>
SolveResult<D> run_solver(const HybridModel<D>& model, const SchemeConfig& cfg) {
  if (model.closed_form_hamiltonian)
    return run_solver<D>(model, model.closed_form_hamiltonian, cfg);
  return run_solver<D>(model, SampledHamiltonian<D>(model, cfg.control_samples), cfg);
}

}  // namespace hjreach
