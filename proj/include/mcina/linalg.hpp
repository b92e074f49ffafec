#pragma once

// Small fixed-size dense linear algebra for the 9-state INa Markov chain.
// Everything is a value type; matrices are row-major.

#include <array>
#include <cmath>
#include <complex>

namespace mcina {

inline constexpr int kStates = 9;

// Canonical state ordering. O is the conducting (open) state; the rest are
// closed/inactivated conformations ordered clockwise around the chain diagram.
enum State : int { O = 0, P, Q, R, S, T, U, V, W };

using Vec9 = std::array<double, kStates>;
using StateOccupancy = Vec9;

inline double sum(const Vec9& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double max_abs(const Vec9& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct Mat9 {
  std::array<double, kStates * kStates> m{};

  double& operator()(int r, int c) { return m[r * kStates + c]; }
  double operator()(int r, int c) const { return m[r * kStates + c]; }

  static Mat9 identity() {
    Mat9 a;
    for (int i = 0; i < kStates; ++i) a(i, i) = 1.0;
    return a;
  }

  bool operator==(const Mat9& o) const { return m == o.m; }
};

inline Mat9 operator+(const Mat9& a, const Mat9& b) {
  Mat9 r;
  for (int i = 0; i < kStates * kStates; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

inline Mat9 operator-(const Mat9& a, const Mat9& b) {
  Mat9 r;
  for (int i = 0; i < kStates * kStates; ++i) r.m[i] = a.m[i] - b.m[i];
  return r;
}

inline Mat9 operator*(double s, const Mat9& a) {
  Mat9 r;
  for (int i = 0; i < kStates * kStates; ++i) r.m[i] = s * a.m[i];
  return r;
}

inline Mat9 operator*(const Mat9& a, const Mat9& b) {
  Mat9 r;
  for (int i = 0; i < kStates; ++i)
    for (int k = 0; k < kStates; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < kStates; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Vec9 operator*(const Mat9& a, const Vec9& v) {
  Vec9 r{};
  for (int i = 0; i < kStates; ++i) {
    double s = 0.0;
    for (int j = 0; j < kStates; ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

inline double frobenius_norm(const Mat9& a) {
  double s = 0.0;
  for (double x : a.m) s += x * x;
  return std::sqrt(s);
}

// Largest absolute entry.
inline double max_abs(const Mat9& a) {
  double m = 0.0;
  for (double x : a.m) m = std::max(m, std::fabs(x));
  return m;
}

// Induced infinity norm (max absolute row sum).
inline double inf_norm(const Mat9& a) {
  double m = 0.0;
  for (int i = 0; i < kStates; ++i) {
    double s = 0.0;
    for (int j = 0; j < kStates; ++j) s += std::fabs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

inline Mat9 commutator(const Mat9& a, const Mat9& b) { return a * b - b * a; }

// Spectral norm (largest singular value) by power iteration on AtA.
inline double spectral_norm(const Mat9& m) {
  Vec9 x;
  for (int i = 0; i < kStates; ++i) x[i] = 1.0 + 1e-3 * i;  // break symmetry
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec9 mx{};
    for (int i = 0; i < kStates; ++i) {
      double s = 0.0;
      for (int j = 0; j < kStates; ++j) s += m(i, j) * x[j];
      mx[i] = s;
    }
    Vec9 y{};
    for (int j = 0; j < kStates; ++j) {
      double s = 0.0;
      for (int i = 0; i < kStates; ++i) s += m(i, j) * mx[i];
      y[j] = s;
    }
    double n = 0.0;
    for (double v : y) n += v * v;
    n = std::sqrt(n);
    if (n == 0.0) return 0.0;
    for (int i = 0; i < kStates; ++i) x[i] = y[i] / n;
    if (it > 4 && std::fabs(n - lam) <= 1e-13 * n) {
      lam = n;
      break;
    }
    lam = n;
  }
  return std::sqrt(lam);
}

// --- complex counterparts (used by the eigendecomposition machinery) ---

using Complex = std::complex<double>;
using CVec9 = std::array<Complex, kStates>;

struct CMat9 {
  std::array<Complex, kStates * kStates> m{};

  Complex& operator()(int r, int c) { return m[r * kStates + c]; }
  const Complex& operator()(int r, int c) const { return m[r * kStates + c]; }

  static CMat9 identity() {
    CMat9 a;
    for (int i = 0; i < kStates; ++i) a(i, i) = 1.0;
    return a;
  }
};

inline CMat9 operator*(const CMat9& a, const CMat9& b) {
  CMat9 r;
  for (int i = 0; i < kStates; ++i)
    for (int k = 0; k < kStates; ++k) {
      const Complex aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < kStates; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline double frobenius_norm(const CMat9& a) {
  double s = 0.0;
  for (const Complex& x : a.m) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace mcina
