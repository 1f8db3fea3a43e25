#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjreach/geometry.hpp"

namespace hjreach {

/// Compact box of admissible continuous controls for one mode.
struct ControlBox {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(std::span<const double> u, double slack = 1e-12) const {
    if (static_cast<int>(u.size()) != dim()) return false;
    for (int j = 0; j < dim(); ++j)
      if (u[j] < lo[j] - slack || u[j] > hi[j] + slack) return false;
    return true;
  }
};

/// Switched system: one controlled vector field per mode, a discrete map
/// selecting the mode across a switch, and a minimum time lag between
/// consecutive switch decisions.
template <int D>
struct HybridModel {
  using DynamicsFn =
      std::function<Vec<D>(double s, const Vec<D>& x, std::span<const double> u, int q)>;
  using SwitchFn = std::function<int(int w, int q)>;
  using HamiltonianFn =
      std::function<double(double s, const Vec<D>& x, int q, const Vec<D>& z)>;

  int num_modes = 0;
  DynamicsFn dynamics;
  SwitchFn switch_map;
  std::vector<ControlBox> control_bounds;        // U(q), one per mode
  std::vector<std::vector<int>> switch_decisions;  // W(q), one per mode
  double lag_delta = 0.0;                        // > 0
  Box<D> admissible_box{};                       // K
  Ball<D> initial_ball{};                        // X0; radius <= 0 means "pick at solve time"
  double velocity_bound = 0.0;                   // sup |f| over modes and admissible controls

  // Set when the supremum over U(q) has a closed form; the generic
  // control-sampling path is used otherwise.
  HamiltonianFn closed_form_hamiltonian;
};

template <int D>
inline void check_mode(const HybridModel<D>& model, int q) {
  if (q < 0 || q >= model.num_modes)
    throw std::invalid_argument("mode " + std::to_string(q) + " out of range [0," +
                                std::to_string(model.num_modes) + ")");
}

/// Vector field evaluation with contract checks on the mode and control.
template <int D>
inline Vec<D> eval_dynamics(const HybridModel<D>& model, double s, const Vec<D>& x,
                            std::span<const double> u, int q) {
  check_mode(model, q);
  if (!model.control_bounds[static_cast<std::size_t>(q)].contains(u))
    throw std::invalid_argument("control outside U(q) for mode " + std::to_string(q));
  return model.dynamics(s, x, u, q);
}

/// Discrete transition across a switch decision w taken in mode q.
template <int D>
inline int eval_switch(const HybridModel<D>& model, int w, int q) {
  check_mode(model, q);
  const auto& allowed = model.switch_decisions[static_cast<std::size_t>(q)];
  bool ok = false;
  for (int cand : allowed) ok = ok || (cand == w);
  if (!ok)
    throw std::invalid_argument("decision " + std::to_string(w) +
                                " not admissible in mode " + std::to_string(q));
  const int next = model.switch_map(w, q);
  if (next < 0 || next >= model.num_modes)
    throw std::logic_error("switch map left the mode set");
  return next;
}

// ---------------------------------------------------------------------------
// Two-mode energy model: state (battery, fuel), an auxiliary power source that
// relieves the battery while burning fuel.
// ---------------------------------------------------------------------------

struct VehicleParams {
  double a_x = 0.1;    // battery depletion rate, > 0
  double a_y = 0.15;   // fuel depletion rate while the source runs, > 0
  double u_max = 0.07;  // maximum source power, >= 0
};

inline Vec<2> vehicle_velocity(const VehicleParams& p, double u, int q) {
  const double qd = static_cast<double>(q);
  return Vec<2>{-p.a_x + qd * u, -qd * (p.a_y + u)};
}

/// Closed form of sup_{u in [0,u_max]} f(x,u,q) . z for the vehicle field:
/// the expression is affine in u, so the supremum sits at an endpoint,
///   H(q, z) = -a_x z1 - q a_y z2 + q u_max max(0, z1 - z2).
struct VehicleHamiltonian {
  VehicleParams params;

  double operator()(double, const Vec<2>&, int q, const Vec<2>& z) const {
    const double qd = static_cast<double>(q);
    return -params.a_x * z[0] - qd * params.a_y * z[1] +
           qd * params.u_max * std::max(0.0, z[0] - z[1]);
  }
};

enum class SwitchPolicy {
  kToggleOnly,  // W(q) = {1}: every decision flips the mode
  kFull,        // W(q) = {0, 1}: includes the self-switch that only resets the lag clock
  kNone,        // W(q) empty: switching disabled
};

inline std::vector<std::vector<int>> vehicle_decision_sets(SwitchPolicy policy) {
  switch (policy) {
    case SwitchPolicy::kToggleOnly:
      return {{1}, {1}};
    case SwitchPolicy::kFull:
      return {{0, 1}, {0, 1}};
    case SwitchPolicy::kNone:
      return {{}, {}};
  }
  std::abort();
}

inline HybridModel<2> make_vehicle_model(const VehicleParams& params, double lag_delta,
                                         Box<2> admissible = {{0.0, 0.0}, {1.0, 1.0}},
                                         Ball<2> initial = {},
                                         SwitchPolicy policy = SwitchPolicy::kToggleOnly) {
  if (!(params.a_x > 0.0) || !(params.a_y > 0.0))
    throw std::invalid_argument("depletion rates must be positive");
  if (params.u_max < 0.0) throw std::invalid_argument("u_max must be nonnegative");
  if (!(lag_delta > 0.0)) throw std::invalid_argument("switch lag must be positive");

  HybridModel<2> model;
  model.num_modes = 2;
  model.dynamics = [params](double, const Vec<2>&, std::span<const double> u, int q) {
    return vehicle_velocity(params, u.empty() ? 0.0 : u[0], q);
  };
  model.switch_map = [](int w, int q) { return std::abs(q - w); };
  model.control_bounds = {ControlBox{{0.0}, {params.u_max}},
                          ControlBox{{0.0}, {params.u_max}}};
  model.switch_decisions = vehicle_decision_sets(policy);
  model.lag_delta = lag_delta;
  model.admissible_box = admissible;
  model.initial_ball = initial;
  // |f| is affine in u per component, so the norm peaks at a control endpoint.
  model.velocity_bound = 0.0;
  for (int q = 0; q < 2; ++q)
    for (double u : {0.0, params.u_max})
      model.velocity_bound = std::max(model.velocity_bound, norm(vehicle_velocity(params, u, q)));
  model.closed_form_hamiltonian = VehicleHamiltonian{params};
  return model;
}

}  // namespace hjreach
