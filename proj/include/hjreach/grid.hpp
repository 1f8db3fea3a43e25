#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hjreach/geometry.hpp"

namespace hjreach {

/// Rectangular lattice over state x mode x switch-lock, plus the time step.
/// x nodes cover the admissible box inflated by a margin; lock levels
/// p_k = k dp run from 0 up to lag + horizon so that the "never switched"
/// lock value delta + s stays representable through the whole run.
template <int D>
struct Grid {
  Vec<D> x_min{};
  Vec<D> x_max{};
  Vec<D> dx{};
  std::array<int, D> nx{};  // nodes per axis

  double dp = 0.0;
  int num_p = 0;  // lock levels k = 0 .. num_p
  int num_modes = 0;
  int min_switch_index = 0;  // smallest k with k dp >= lag

  double horizon = 0.0;
  double dt = 0.0;
  int num_steps = 0;

  long long x_node_count() const {
    long long n = 1;
    for (int j = 0; j < D; ++j) n *= nx[j];
    return n;
  }
  int p_level_count() const { return num_p + 1; }
  long long row_count() const { return static_cast<long long>(num_modes) * p_level_count(); }
  long long node_count() const { return row_count() * x_node_count(); }

  long long x_stride(int axis) const {
    long long s = 1;
    for (int j = 0; j < axis; ++j) s *= nx[j];
    return s;
  }

  long long flatten_x(const std::array<int, D>& idx) const {
    long long flat = 0;
    long long stride = 1;
    for (int j = 0; j < D; ++j) {
      flat += static_cast<long long>(idx[j]) * stride;
      stride *= nx[j];
    }
    return flat;
  }

  std::array<int, D> unflatten_x(long long flat) const {
    std::array<int, D> idx{};
    for (int j = 0; j < D; ++j) {
      idx[j] = static_cast<int>(flat % nx[j]);
      flat /= nx[j];
    }
    return idx;
  }

  Vec<D> x_coord(const std::array<int, D>& idx) const {
    Vec<D> x{};
    for (int j = 0; j < D; ++j) x[j] = x_min[j] + idx[j] * dx[j];
    return x;
  }
  Vec<D> x_coord(long long flat) const { return x_coord(unflatten_x(flat)); }

  double p_coord(int k) const { return k * dp; }
  double time_at(int n) const { return n * dt; }

  bool is_x_boundary(const std::array<int, D>& idx) const {
    for (int j = 0; j < D; ++j)
      if (idx[j] == 0 || idx[j] == nx[j] - 1) return true;
    return false;
  }
};

/// One time level of the discrete value function, dense storage laid out
/// mode-major, then lock-major, then x (x fastest).
struct ValueField {
  long long num_x = 0;
  int num_modes = 0;
  int num_p = 0;
  std::vector<double> data;

  long long row_offset(int q, int k) const {
    return (static_cast<long long>(q) * (num_p + 1) + k) * num_x;
  }
  double& at(long long x_flat, int q, int k) {
    return data[static_cast<std::size_t>(row_offset(q, k) + x_flat)];
  }
  double at(long long x_flat, int q, int k) const {
    return data[static_cast<std::size_t>(row_offset(q, k) + x_flat)];
  }
  std::span<double> row(int q, int k) {
    return {data.data() + row_offset(q, k), static_cast<std::size_t>(num_x)};
  }
  std::span<const double> row(int q, int k) const {
    return {data.data() + row_offset(q, k), static_cast<std::size_t>(num_x)};
  }
};

template <int D>
inline ValueField make_field(const Grid<D>& grid) {
  ValueField f;
  f.num_x = grid.x_node_count();
  f.num_modes = grid.num_modes;
  f.num_p = grid.num_p;
  f.data.assign(static_cast<std::size_t>(grid.node_count()), 0.0);
  return f;
}

/// Byte per x node: 1 on the outermost lattice ring, where the value is
/// pinned instead of differenced.
template <int D>
inline std::vector<std::uint8_t> boundary_mask(const Grid<D>& grid) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.x_node_count()), 0);
  for (long long f = 0; f < grid.x_node_count(); ++f)
    mask[static_cast<std::size_t>(f)] = grid.is_x_boundary(grid.unflatten_x(f)) ? 1 : 0;
  return mask;
}

struct GridGeometry {
  double margin = 0.1;
  double dx = 0.025;
  double dp = 0.05;
  double horizon = 8.0;
};

/// Lattice construction. The x box is the admissible box inflated by
/// `margin` on every side; the lock axis is sized to ceil((lag+horizon)/dp).
template <int D>
inline Grid<D> build_grid(const GridGeometry& geom, const Box<D>& admissible, double lag_delta,
                          int num_modes) {
  if (!(geom.dx > 0.0) || !(geom.dp > 0.0))
    throw std::invalid_argument("grid spacings must be positive");
  if (geom.margin + 1e-12 < geom.dx)
    throw std::invalid_argument("margin must cover at least one cell");
  if (!(geom.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(lag_delta > 0.0)) throw std::invalid_argument("switch lag must be positive");
  if (num_modes < 1) throw std::invalid_argument("need at least one mode");

  Grid<D> grid;
  grid.num_modes = num_modes;
  grid.horizon = geom.horizon;
  grid.dp = geom.dp;
  for (int j = 0; j < D; ++j) {
    grid.x_min[j] = admissible.lo[j] - geom.margin;
    grid.dx[j] = geom.dx;
    const double extent = (admissible.hi[j] - admissible.lo[j]) + 2.0 * geom.margin;
    grid.nx[j] = static_cast<int>(std::ceil(extent / geom.dx - 1e-9)) + 1;
    grid.x_max[j] = grid.x_min[j] + (grid.nx[j] - 1) * geom.dx;
  }
  grid.num_p = static_cast<int>(std::ceil((lag_delta + geom.horizon) / geom.dp - 1e-12));
  grid.min_switch_index = static_cast<int>(std::ceil(lag_delta / geom.dp - 1e-12));
  if (grid.num_p * geom.dp < lag_delta + geom.dp - 1e-9)
    throw std::invalid_argument("lock axis too short: need num_p*dp >= lag + dp");
  return grid;
}

template <int D>
inline void finalize_time_step(Grid<D>& grid, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  grid.dt = dt;
  grid.num_steps = static_cast<int>(std::ceil(grid.horizon / dt - 1e-12));
}

/// One-sided differences D-(j) = (v_I - v_{I-e_j})/dx_j and
/// D+(j) = (v_{I+e_j} - v_I)/dx_j at an interior x node.
template <int D>
inline std::pair<Vec<D>, Vec<D>> upwind_gradients(const ValueField& field, const Grid<D>& grid,
                                                  const std::array<int, D>& idx, int q, int k) {
  for (int j = 0; j < D; ++j)
    if (idx[j] <= 0 || idx[j] >= grid.nx[j] - 1)
      throw std::out_of_range("one-sided differences need an interior x node");
  const long long flat = grid.flatten_x(idx);
  const double* row = field.data.data() + field.row_offset(q, k);
  Vec<D> backward{};
  Vec<D> forward{};
  const double center = row[flat];
  for (int j = 0; j < D; ++j) {
    const long long stride = grid.x_stride(j);
    backward[j] = (center - row[flat - stride]) / grid.dx[j];
    forward[j] = (row[flat + stride] - center) / grid.dx[j];
  }
  return {backward, forward};
}

}  // namespace hjreach
