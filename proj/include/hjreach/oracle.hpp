#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjreach/hybrid_model.hpp"
#include "hjreach/solver.hpp"

namespace hjreach {

/// Closed-form autonomy of the two-mode energy model. Running the auxiliary
/// source flat out empties the fuel at t* = y0/(a_y+u_max); if the battery
/// dies first the answer is x0/(a_x-u_max), otherwise the battery survives to
/// (x0 + u_max t*)/a_x.
inline double analytic_autonomy(double x0, double y0, double a_x, double a_y, double u_max) {
  if (a_x <= u_max)
    throw std::invalid_argument(
        "battery non-depleting while fueled; closed-form autonomy inapplicable");
  if (!(a_y + u_max > 0.0)) throw std::invalid_argument("fuel consumption rate must be positive");
  if (!(x0 > 0.0) || x0 > 1.0 || !(y0 > 0.0) || y0 > 1.0)
    throw std::invalid_argument("initial energies must lie in (0, 1]");
  const double t_fuel = y0 / (a_y + u_max);
  if (x0 * (a_y + u_max) <= y0 * (a_x - u_max)) return x0 / (a_x - u_max);
  return (x0 + u_max * t_fuel) / a_x;
}

/// Forward-Euler check of the closed form: run the source at full power until
/// the fuel is gone, then coast, and report the first battery zero crossing
/// (linearly interpolated inside the crossing step).
inline double simulate_best_policy(double x0, double y0, const VehicleParams& params,
                                   double dt_fine = 1e-5) {
  if (!(dt_fine > 0.0)) throw std::invalid_argument("simulation step must be positive");
  double battery = x0;
  double fuel = y0;
  double t = 0.0;
  // hard cap well past any admissible autonomy
  const double t_stop = (x0 + 1.0) / std::max(1e-12, params.a_x - params.u_max) + 1.0;
  while (battery > 0.0 && t < t_stop) {
    const int q = fuel > 0.0 ? 1 : 0;
    const Vec<2> f = vehicle_velocity(params, params.u_max, q);
    const double battery_next = battery + dt_fine * f[0];
    const double fuel_next = std::max(0.0, fuel + dt_fine * f[1]);
    if (battery_next <= 0.0) return t + dt_fine * battery / (battery - battery_next);
    battery = battery_next;
    fuel = fuel_next;
    t += dt_fine;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Grid-value lookup and admissible-trajectory sampling
// ---------------------------------------------------------------------------

/// Multilinear interpolation in x and the lock variable on the snapshot
/// nearest in time. Coordinates are clamped to the lattice hull.
template <int D>
inline double interpolate_value(const SolveResult<D>& run, const Vec<D>& x, int q, double p,
                                double s) {
  if (run.snapshots.empty())
    throw std::logic_error("value interpolation needs retained field snapshots");
  const FieldSnapshot* best = &run.snapshots.front();
  for (const auto& snap : run.snapshots)
    if (std::abs(snap.time - s) < std::abs(best->time - s)) best = &snap;
  const ValueField& f = best->field;
  const Grid<D>& grid = run.grid;

  std::array<int, D> cell{};
  Vec<D> w{};
  for (int j = 0; j < D; ++j) {
    const double t = (x[j] - grid.x_min[j]) / grid.dx[j];
    cell[j] = std::clamp(static_cast<int>(std::floor(t)), 0, grid.nx[j] - 2);
    w[j] = std::clamp(t - cell[j], 0.0, 1.0);
  }
  const double tp = p / grid.dp;
  const int kp = std::clamp(static_cast<int>(std::floor(tp)), 0, grid.num_p - 1);
  const double wp = std::clamp(tp - kp, 0.0, 1.0);

  double acc = 0.0;
  for (int corner = 0; corner < (1 << D); ++corner) {
    std::array<int, D> idx = cell;
    double weight = 1.0;
    for (int j = 0; j < D; ++j) {
      if (corner & (1 << j)) {
        idx[j] += 1;
        weight *= w[j];
      } else {
        weight *= 1.0 - w[j];
      }
    }
    const long long flat = grid.flatten_x(idx);
    const double lo = f.at(flat, q, kp);
    const double hi = f.at(flat, q, kp + 1);
    acc += weight * ((1.0 - wp) * lo + wp * hi);
  }
  return acc;
}

struct AdmissibleSample {
  Vec<2> start{};
  Vec<2> end{};
  int end_mode = 0;
  double end_lock = 0.0;
  double end_time = 0.0;
  double cost = 0.0;  // target(start) joined with the running obstacle max
  int switches = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  double grid_value = 0.0;
  bool in_box = true;
};

/// Draws lag-respecting hybrid controls, integrates the model forward from a
/// start inside the initial set, and evaluates the trajectory cost plus the
/// interpolated grid value at the endpoint. Every sampled control keeps
/// switch gaps >= lag and at most floor(s/lag) switches by construction.
/// Samples whose trajectory leaves the computational box are redrawn a few
/// times and flagged when the retries run out, since the saturated boundary
/// data makes the endpoint value meaningless there.
inline std::vector<AdmissibleSample> sample_admissible_cost(const HybridModel<2>& model,
                                                            const SolveResult<2>& run,
                                                            int num_samples,
                                                            std::uint64_t seed) {
  if (run.snapshots.empty())
    throw std::logic_error("admissible-cost sampling needs retained field snapshots");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<const FieldSnapshot*> usable;
  for (const auto& snap : run.snapshots)
    if (snap.time > 0.0) usable.push_back(&snap);
  if (usable.empty()) throw std::logic_error("no retained snapshot with positive time");

  // The target function is the clipped distance to the initial set; sample
  // starts by rejection against its sign, bounded by the lattice hull.
  auto draw_start = [&]() {
    for (int tries = 0; tries < 4096; ++tries) {
      Vec<2> x{};
      for (int j = 0; j < 2; ++j)
        x[j] = run.grid.x_min[j] + unit(rng) * (run.grid.x_max[j] - run.grid.x_min[j]);
      if (run.target_fn(x) <= 0.0) return x;
    }
    throw std::runtime_error("could not sample a start inside the initial set");
  };

  const double lag = model.lag_delta;
  std::vector<AdmissibleSample> samples;
  samples.reserve(static_cast<std::size_t>(num_samples));

  for (int i = 0; i < num_samples; ++i) {
    AdmissibleSample sample;
    for (int attempt = 0; attempt < 50; ++attempt) {
      sample = AdmissibleSample{};
      const FieldSnapshot* snap =
          usable[static_cast<std::size_t>(std::floor(unit(rng) * usable.size())) % usable.size()];
      const double s_end = snap->time;
      sample.end_time = s_end;
      sample.start = draw_start();

      int mode = model.num_modes > 1
                     ? static_cast<int>(std::floor(unit(rng) * model.num_modes)) % model.num_modes
                     : 0;

      // switch schedule: first time anywhere in [0, s], later gaps >= lag
      const int max_switches = static_cast<int>(std::floor(s_end / lag + 1e-12));
      const int want =
          max_switches > 0 ? static_cast<int>(std::floor(unit(rng) * (max_switches + 1))) : 0;
      std::vector<double> switch_times;
      double last = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < want; ++c) {
        double t_next;
        if (switch_times.empty()) {
          t_next = unit(rng) * s_end;
        } else {
          const double lo = last + lag;
          if (lo >= s_end) break;
          t_next = lo + unit(rng) * (s_end - lo);
        }
        switch_times.push_back(t_next);
        last = t_next;
      }
      std::sort(switch_times.begin(), switch_times.end());
      sample.switches = static_cast<int>(switch_times.size());
      for (std::size_t c = 1; c < switch_times.size(); ++c)
        sample.min_gap = std::min(sample.min_gap, switch_times[c] - switch_times[c - 1]);

      auto draw_control = [&](int q) {
        const auto& box = model.control_bounds[static_cast<std::size_t>(q)];
        std::vector<double> u(static_cast<std::size_t>(box.dim()));
        for (int j = 0; j < box.dim(); ++j) u[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);
        return u;
      };

      const double dt_sim = std::min(1e-3, s_end / 1000.0);
      const double resample_every = std::max(dt_sim, s_end / 8.0);
      Vec<2> y = sample.start;
      double obstacle_max = run.obstacle_fn(y);
      double t = 0.0;
      double last_switch = -1.0;  // negative: no switch yet
      std::size_t next_switch = 0;
      std::vector<double> u = draw_control(mode);
      double next_resample = resample_every;
      bool in_box = true;
      while (t < s_end - 0.5 * dt_sim) {
        if (next_switch < switch_times.size() && t >= switch_times[next_switch]) {
          const auto& allowed = model.switch_decisions[static_cast<std::size_t>(mode)];
          if (!allowed.empty()) {
            const int w = allowed[static_cast<std::size_t>(std::floor(unit(rng) * allowed.size())) %
                                  allowed.size()];
            mode = model.switch_map(w, mode);
            last_switch = switch_times[next_switch];
            u = draw_control(mode);
          }
          ++next_switch;
        }
        if (t >= next_resample) {
          u = draw_control(mode);
          next_resample += resample_every;
        }
        const Vec<2> f = model.dynamics(t, y, u, mode);
        const double h = std::min(dt_sim, s_end - t);
        y = y + h * f;
        t += h;
        obstacle_max = std::max(obstacle_max, run.obstacle_fn(y));
        for (int j = 0; j < 2; ++j)
          if (y[j] < run.grid.x_min[j] || y[j] > run.grid.x_max[j]) in_box = false;
        if (!in_box) break;
      }
      if (!in_box && attempt + 1 < 50) continue;

      sample.in_box = in_box;
      sample.end = y;
      sample.end_mode = mode;
      sample.end_lock = last_switch < 0.0 ? lag + s_end : s_end - last_switch;
      sample.cost = std::max(run.target_fn(sample.start), obstacle_max);
      sample.grid_value =
          in_box ? interpolate_value(run, y, mode, sample.end_lock, s_end) : run.target_fn(y);
      break;
    }
    samples.push_back(sample);
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Convergence harness
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double analytic = 0.0;
  bool reached = false;
  double autonomy_value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string note;
};

/// Runs the solver per (instance, dx) pair and compares the measured autonomy
/// against the closed form. Solver failures are recorded in the row instead
/// of aborting the table.
inline std::vector<ConvergenceRow> convergence_table(const VehicleParams& params, double lag,
                                                     const std::vector<Vec<2>>& instances,
                                                     const std::vector<double>& dx_list,
                                                     SchemeConfig base,
                                                     Box<2> admissible = {{0.0, 0.0}, {1.0, 1.0}},
                                                     SwitchPolicy policy =
                                                         SwitchPolicy::kToggleOnly) {
  std::vector<ConvergenceRow> rows;
  for (const auto& inst : instances) {
    for (double dx : dx_list) {
      ConvergenceRow row;
      row.x0 = inst[0];
      row.y0 = inst[1];
      row.dx = dx;
      try {
        row.analytic = analytic_autonomy(inst[0], inst[1], params.a_x, params.a_y, params.u_max);
        SchemeConfig cfg = base;
        cfg.dx = dx;
        cfg.retain_fields = false;
        auto model = make_vehicle_model(params, lag, admissible,
                                        Ball<2>{{inst[0], inst[1]}, 2.0 * dx}, policy);
        const auto result = run_solver<2>(model, VehicleHamiltonian{params}, cfg);
        row.reached = result.autonomy.reached;
        row.autonomy_value = result.autonomy.value;
        row.bracket_lo = result.autonomy.bracket_lo;
        row.bracket_hi = result.autonomy.bracket_hi;
        row.seconds = result.wall_seconds;
        if (row.reached) {
          row.error = std::abs(row.analytic - row.autonomy_value);
        } else {
          row.note = "reachable set never emptied within the horizon";
        }
      } catch (const std::exception& err) {
        row.note = err.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace hjreach
