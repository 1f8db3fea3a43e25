#pragma once

#include <algorithm>
#include <stdexcept>
#include <variant>
#include <vector>

#include "hjreach/geometry.hpp"

namespace hjreach {

/// Signed-distance samples on a regular lattice, nearest-node lookup.
/// Fallback representation for sets without a closed-form distance.
template <int D>
struct TabulatedDistance {
  Vec<D> origin{};
  Vec<D> spacing{};
  std::array<int, D> count{};
  std::vector<double> values;

  double operator()(const Vec<D>& x) const {
    long long flat = 0;
    long long stride = 1;
    for (int j = 0; j < D; ++j) {
      long long i = static_cast<long long>(std::lround((x[j] - origin[j]) / spacing[j]));
      i = std::clamp<long long>(i, 0, count[j] - 1);
      flat += i * stride;
      stride *= count[j];
    }
    return values[static_cast<std::size_t>(flat)];
  }
};

/// Clipped level-set representation of a set: negative inside, positive
/// outside, values saturated to [-clip_bound, +clip_bound]. Clipping never
/// changes the sign, so membership survives it.
template <int D>
class LevelSetFn {
 public:
  LevelSetFn() = default;

  LevelSetFn(Ball<D> ball, double clip_bound)
      : shape_(ball), clip_bound_(check(clip_bound)) {}

  LevelSetFn(Box<D> box, double clip_bound)
      : shape_(box), clip_bound_(check(clip_bound)) {}

  LevelSetFn(TabulatedDistance<D> table, double clip_bound)
      : shape_(std::move(table)), clip_bound_(check(clip_bound)) {}

  double clip_bound() const { return clip_bound_; }

  double operator()(const Vec<D>& x) const {
    const double d = std::visit(
        [&](const auto& shape) -> double {
          using S = std::decay_t<decltype(shape)>;
          if constexpr (std::is_same_v<S, TabulatedDistance<D>>) {
            return shape(x);
          } else {
            return shape.signed_distance(x);
          }
        },
        shape_);
    return std::clamp(d, -clip_bound_, clip_bound_);
  }

 private:
  static double check(double clip_bound) {
    if (!(clip_bound > 0.0))
      throw std::invalid_argument("level set clip bound must be positive");
    return clip_bound;
  }

  std::variant<Ball<D>, Box<D>, TabulatedDistance<D>> shape_{Ball<D>{}};
  double clip_bound_ = 1.0;
};

}  // namespace hjreach
