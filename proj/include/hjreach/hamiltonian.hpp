#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hjreach/grid.hpp"
#include "hjreach/hybrid_model.hpp"

namespace hjreach {

namespace detail {

/// Uniform lattice over a control box, both endpoints included per axis.
inline std::vector<std::vector<double>> control_lattice(const ControlBox& box,
                                                        int points_per_axis) {
  const int m = box.dim();
  std::vector<std::vector<double>> lattice;
  if (m == 0) {
    lattice.push_back({});
    return lattice;
  }
  points_per_axis = std::max(2, points_per_axis);
  std::vector<int> digit(static_cast<std::size_t>(m), 0);
  while (true) {
    std::vector<double> u(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const double t = static_cast<double>(digit[j]) / (points_per_axis - 1);
      u[j] = box.lo[j] + t * (box.hi[j] - box.lo[j]);
    }
    lattice.push_back(std::move(u));
    int j = 0;
    while (j < m && ++digit[j] == points_per_axis) digit[j++] = 0;
    if (j == m) break;
  }
  return lattice;
}

}  // namespace detail

/// sup_{u in U(q)} f(s,x,u,q) . z evaluated on a uniform control lattice.
/// Exact for dynamics affine in u whenever the box corners are lattice
/// points, which they are by construction. Lattices are built once per mode.
template <int D>
class SampledHamiltonian {
 public:
  SampledHamiltonian(const HybridModel<D>& model, int control_samples = 50) : model_(&model) {
    lattices_.reserve(static_cast<std::size_t>(model.num_modes));
    for (const auto& box : model.control_bounds)
      lattices_.push_back(detail::control_lattice(box, control_samples));
  }

  double operator()(double s, const Vec<D>& x, int q, const Vec<D>& z) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : lattices_[static_cast<std::size_t>(q)])
      best = std::max(best, dot(model_->dynamics(s, x, u, q), z));
    return best;
  }

 private:
  const HybridModel<D>* model_;
  std::vector<std::vector<std::vector<double>>> lattices_;
};

/// Hamiltonian of the mode-q field at costate z, using the model's closed
/// form when it has one and control sampling otherwise.
template <int D>
inline double exact_hamiltonian(const HybridModel<D>& model, double s, const Vec<D>& x, int q,
                                const Vec<D>& z, int control_samples = 50) {
  check_mode(model, q);
  if (model.closed_form_hamiltonian) return model.closed_form_hamiltonian(s, x, q, z);
  return SampledHamiltonian<D>(model, control_samples)(s, x, q, z);
}

/// Per-axis bounds c_j >= sup |f_j| over modes, sampled controls and sampled
/// (t, x). Since H is a supremum of functions linear in z, sup |dH/dz_j|
/// equals sup |f_j|, so these are valid Lax-Friedrichs dissipation constants.
template <int D>
inline Vec<D> dissipation_constants(const HybridModel<D>& model, const Grid<D>& grid,
                                    int control_points = 50) {
  Vec<D> c{};
  std::array<int, D> xi{};
  constexpr int kXPointsPerAxis = 9;
  const double times[3] = {0.0, 0.5 * grid.horizon, grid.horizon};
  for (int q = 0; q < model.num_modes; ++q) {
    const auto lattice =
        detail::control_lattice(model.control_bounds[static_cast<std::size_t>(q)], control_points);
    // odometer over the x lattice
    xi.fill(0);
    while (true) {
      Vec<D> x{};
      for (int j = 0; j < D; ++j) {
        const double t = static_cast<double>(xi[j]) / (kXPointsPerAxis - 1);
        x[j] = grid.x_min[j] + t * (grid.x_max[j] - grid.x_min[j]);
      }
      for (double s : times)
        for (const auto& u : lattice) {
          const Vec<D> f = model.dynamics(s, x, u, q);
          for (int j = 0; j < D; ++j) c[j] = std::max(c[j], std::abs(f[j]));
        }
      int j = 0;
      while (j < D && ++xi[j] == kXPointsPerAxis) xi[j++] = 0;
      if (j == D) break;
    }
  }
  return c;
}

/// Time step from the stability bound dt (1/dp + sum_j c_j/dx_j) <= 1,
/// scaled by a safety factor in (0, 1].
template <int D>
inline double cfl_timestep(const Grid<D>& grid, const Vec<D>& c, double cfl_factor) {
  if (!(cfl_factor > 0.0) || cfl_factor > 1.0)
    throw std::invalid_argument("CFL factor must lie in (0, 1]");
  if (!(grid.dp > 0.0)) throw std::invalid_argument("lock spacing must be positive");
  double rate = 1.0 / grid.dp;
  for (int j = 0; j < D; ++j) {
    if (!(grid.dx[j] > 0.0)) throw std::invalid_argument("x spacing must be positive");
    rate += c[j] / grid.dx[j];
  }
  return cfl_factor / rate;
}

/// Local Lax-Friedrichs numerical Hamiltonian: the exact Hamiltonian at the
/// averaged one-sided gradients minus dissipation proportional to their jump.
/// Monotone (nonincreasing in forward differences, nondecreasing in backward
/// ones) whenever c_j dominates |dH/dz_j|, and exactly consistent when both
/// sides agree.
template <int D, class HamFn>
struct NumericalHamiltonian {
  HamFn hamiltonian;
  Vec<D> dissipation{};

  double flux(double s, const Vec<D>& x, int q, const Vec<D>& backward,
              const Vec<D>& forward) const {
    Vec<D> mid{};
    double visc = 0.0;
    for (int j = 0; j < D; ++j) {
      mid[j] = 0.5 * (forward[j] + backward[j]);
      visc += dissipation[j] * 0.5 * (forward[j] - backward[j]);
    }
    return hamiltonian(s, x, q, mid) - visc;
  }
};

template <int D, class HamFn>
inline NumericalHamiltonian<D, HamFn> make_numerical_hamiltonian(HamFn fn, const Vec<D>& c) {
  return NumericalHamiltonian<D, HamFn>{std::move(fn), c};
}

template <int D, class HamFn>
inline double llf_flux(const NumericalHamiltonian<D, HamFn>& nh, double s, const Vec<D>& x, int q,
                       const Vec<D>& backward, const Vec<D>& forward) {
  return nh.flux(s, x, q, backward, forward);
}

}  // namespace hjreach
