#pragma once

// Test-only helpers kept independent of the library's linear algebra paths:
// a plain Gaussian-elimination solver used as the oracle for null vectors and
// steady states, plus deterministic random inputs.

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mcina/linalg.hpp"

namespace testutil {

// Solve M x = b by Gaussian elimination with partial pivoting.
inline mcina::Vec9 solve9(std::array<double, 81> m, mcina::Vec9 b) {
  constexpr int n = 9;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(m[i * n + k]) > std::fabs(m[piv * n + k])) piv = i;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    if (m[k * n + k] == 0.0) throw std::runtime_error("solve9: singular system");
    for (int i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      b[i] -= f * b[k];
    }
  }
  mcina::Vec9 x{};
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m[i * n + j] * x[j];
    x[i] = s / m[i * n + i];
  }
  return x;
}

// Steady state of a generator: A x = 0 with sum(x) = 1, via replacing the
// first equation by the normalization row.
inline mcina::Vec9 steady_state(const mcina::Mat9& a) {
  std::array<double, 81> m{};
  mcina::Vec9 b{};
  for (int j = 0; j < 9; ++j) m[j] = 1.0;
  b[0] = 1.0;
  for (int i = 1; i < 9; ++i)
    for (int j = 0; j < 9; ++j) m[i * 9 + j] = a(i, j);
  return solve9(m, b);
}

// Deterministic random probability vector (components positive, sum 1).
inline mcina::StateOccupancy random_occupancy(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  mcina::StateOccupancy v{};
  double s = 0.0;
  for (double& x : v) {
    x = u(rng);
    s += x;
  }
  for (double& x : v) x /= s;
  return v;
}

inline double max_abs_diff(const mcina::Vec9& a, const mcina::Vec9& b) {
  double m = 0.0;
  for (int i = 0; i < 9; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const mcina::Mat9& a, const mcina::Mat9& b) {
  double m = 0.0;
  for (int i = 0; i < 81; ++i) m = std::max(m, std::fabs(a.m[i] - b.m[i]));
  return m;
}

}  // namespace testutil
