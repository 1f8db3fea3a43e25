#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace hjreach {

template <int D>
using Vec = std::array<double, D>;

template <int D>
inline Vec<D> operator+(Vec<D> a, const Vec<D>& b) {
  for (int j = 0; j < D; ++j) a[j] += b[j];
  return a;
}

template <int D>
inline Vec<D> operator-(Vec<D> a, const Vec<D>& b) {
  for (int j = 0; j < D; ++j) a[j] -= b[j];
  return a;
}

template <int D>
inline Vec<D> operator*(double s, Vec<D> a) {
  for (int j = 0; j < D; ++j) a[j] *= s;
  return a;
}

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
  double r = 0.0;
  for (int j = 0; j < D; ++j) r += a[j] * b[j];
  return r;
}

template <int D>
inline double norm(const Vec<D>& a) {
  return std::sqrt(dot(a, a));
}

/// Axis-aligned box with exact Euclidean signed distance.
template <int D>
struct Box {
  Vec<D> lo{};
  Vec<D> hi{};

  bool contains(const Vec<D>& x) const {
    for (int j = 0; j < D; ++j)
      if (x[j] < lo[j] || x[j] > hi[j]) return false;
    return true;
  }

  // Negative inside (max of per-axis gaps), Euclidean norm of the outward
  // excess outside.
  double signed_distance(const Vec<D>& x) const {
    double inside = -std::numeric_limits<double>::infinity();
    double out_sq = 0.0;
    bool outside = false;
    for (int j = 0; j < D; ++j) {
      const double g = std::max(lo[j] - x[j], x[j] - hi[j]);
      inside = std::max(inside, g);
      if (g > 0.0) {
        outside = true;
        out_sq += g * g;
      }
    }
    return outside ? std::sqrt(out_sq) : inside;
  }
};

template <int D>
struct Ball {
  Vec<D> center{};
  double radius = 0.0;

  bool contains(const Vec<D>& x) const { return norm(x - center) <= radius; }

  double signed_distance(const Vec<D>& x) const {
    return norm(x - center) - radius;
  }
};

}  // namespace hjreach
