#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "polarquad/common.hpp"

namespace polarquad {

struct GaussRule1D {
  int order = 0;
  double a = -1.0, b = 1.0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Legendre roots by Newton iteration on the three-term recurrence.
inline GaussRule1D compute_gauss_legendre(int n) {
  GaussRule1D rule;
  rule.order = n;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    dp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(m - 1)] = 0.0;
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule of order K on [-1, 1], memoised; safe for concurrent
/// readers.
inline const GaussRule1D& gauss_legendre_reference(int K) {
  if (K < 1) throw ValidationError("Gauss-Legendre order must be >= 1, got " + std::to_string(K));
  static std::shared_mutex mutex;
  static std::map<int, std::unique_ptr<const GaussRule1D>> cache;
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(K); it != cache.end()) return *it->second;
  }
  std::unique_lock lock(mutex);
  auto& slot = cache[K];
  if (!slot) slot = std::make_unique<const GaussRule1D>(detail::compute_gauss_legendre(K));
  return *slot;
}

/// K-point Gauss-Legendre rule mapped to (a, b); endpoints are never nodes.
inline GaussRule1D gauss_legendre(int K, double a, double b) {
  if (!(a < b)) throw ValidationError("Gauss-Legendre interval must satisfy a < b");
  GaussRule1D rule = gauss_legendre_reference(K);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  rule.a = a;
  rule.b = b;
  return rule;
}

}  // namespace polarquad
