#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hjreach/grid.hpp"

namespace hjreach {

/// Per-mode minimum of the value over all lock levels, one entry per x node.
inline std::vector<std::vector<double>> min_value_maps(const ValueField& field) {
  std::vector<std::vector<double>> maps(static_cast<std::size_t>(field.num_modes));
  for (int q = 0; q < field.num_modes; ++q) {
    auto& map = maps[static_cast<std::size_t>(q)];
    map.assign(static_cast<std::size_t>(field.num_x), std::numeric_limits<double>::infinity());
    for (int k = 0; k <= field.num_p; ++k) {
      const auto row = field.row(q, k);
      for (long long x = 0; x < field.num_x; ++x) {
        const double v = row[static_cast<std::size_t>(x)];
        if (v < map[static_cast<std::size_t>(x)]) map[static_cast<std::size_t>(x)] = v;
      }
    }
  }
  return maps;
}

/// Level-set readout of the reachable set: a node is reachable when it lies
/// in the admissible set (in_k from the obstacle sign) and some mode/lock pair
/// carries a value at or below tol.
inline std::vector<std::uint8_t> reachable_mask(const ValueField& field,
                                                std::span<const std::uint8_t> in_k, double tol) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(field.num_x), 0);
  for (long long x = 0; x < field.num_x; ++x) {
    if (!in_k[static_cast<std::size_t>(x)]) continue;
    bool hit = false;
    for (int q = 0; q < field.num_modes && !hit; ++q)
      for (int k = 0; k <= field.num_p; ++k)
        if (field.at(x, q, k) <= tol) {
          hit = true;
          break;
        }
    mask[static_cast<std::size_t>(x)] = hit ? 1 : 0;
  }
  return mask;
}

/// Short-circuit emptiness probe. Returns the first reachable x node found,
/// scanning from `hint` (the hit from the previous time level, typically still
/// reachable), or -1 when the mask is empty. The boolean outcome is
/// scan-order independent.
inline long long find_reachable_node(const ValueField& field, std::span<const std::uint8_t> in_k,
                                     double tol, long long hint = 0) {
  const long long n = field.num_x;
  if (n == 0) return -1;
  if (hint < 0 || hint >= n) hint = 0;
  auto reachable_at = [&](long long x) {
    if (!in_k[static_cast<std::size_t>(x)]) return false;
    for (int q = 0; q < field.num_modes; ++q)
      for (int k = 0; k <= field.num_p; ++k)
        if (field.at(x, q, k) <= tol) return true;
    return false;
  };
  for (long long x = hint; x < n; ++x)
    if (reachable_at(x)) return x;
  for (long long x = 0; x < hint; ++x)
    if (reachable_at(x)) return x;
  return -1;
}

struct AutonomyEstimate {
  bool reached = false;
  double value = 0.0;       // first recorded time with an empty mask
  double bracket_lo = 0.0;  // last time with a nonempty mask
  double bracket_hi = 0.0;
};

/// First time level whose reachable mask is empty, with the enclosing
/// one-step bracket.
inline AutonomyEstimate autonomy(std::span<const std::uint8_t> empty_per_step,
                                 std::span<const double> times) {
  AutonomyEstimate est;
  for (std::size_t i = 0; i < empty_per_step.size(); ++i) {
    if (empty_per_step[i]) {
      est.reached = true;
      est.value = times[i];
      est.bracket_lo = i == 0 ? times[0] : times[i - 1];
      est.bracket_hi = times[i];
      return est;
    }
  }
  est.reached = false;
  est.value = times.empty() ? 0.0 : times.back();
  est.bracket_lo = est.value;
  est.bracket_hi = est.value;
  return est;
}

}  // namespace hjreach
