#include "mcina/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcina {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kQrItersPerEigenvalue = 100;

// --- balancing -------------------------------------------------------------
//
// Diagonal similarity scaling with powers of two (exact in floating point) so
// that row and column norms are comparable. The rate matrix spans ~13 orders
// of magnitude between the fast activation rates and the W-state rates, so
// this matters for eigenvalue accuracy.
void balance(Mat9& a, Vec9& scale) {
  scale.fill(1.0);
  constexpr double radix = 2.0;
  bool converged = false;
  int sweeps = 0;
  while (!converged && sweeps++ < 50) {
    converged = true;
    for (int i = 0; i < kStates; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < kStates; ++j) {
        if (j == i) continue;
        c += std::fabs(a(j, i));
        r += std::fabs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        scale[i] *= f;
        const double finv = 1.0 / f;
        for (int j = 0; j < kStates; ++j) a(i, j) *= finv;
        for (int j = 0; j < kStates; ++j) a(j, i) *= f;
      }
    }
  }
}

// --- Hessenberg reduction (real Householder) --------------------------------
void hessenberg(Mat9& a) {
  for (int k = 0; k < kStates - 2; ++k) {
    double norm = 0.0;
    for (int i = k + 1; i < kStates; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    double alpha = a(k + 1, k) >= 0.0 ? -norm : norm;
    Vec9 v{};
    v[k + 1] = a(k + 1, k) - alpha;
    for (int i = k + 2; i < kStates; ++i) v[i] = a(i, k);
    double vtv = 0.0;
    for (int i = k + 1; i < kStates; ++i) vtv += v[i] * v[i];
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;
    // a <- (I - beta v v^T) a
    for (int j = 0; j < kStates; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < kStates; ++i) s += v[i] * a(i, j);
      s *= beta;
      for (int i = k + 1; i < kStates; ++i) a(i, j) -= s * v[i];
    }
    // a <- a (I - beta v v^T)
    for (int i = 0; i < kStates; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < kStates; ++j) s += a(i, j) * v[j];
      s *= beta;
      for (int j = k + 1; j < kStates; ++j) a(i, j) -= s * v[j];
    }
    a(k + 1, k) = alpha;
    for (int i = k + 2; i < kStates; ++i) a(i, k) = 0.0;
  }
}

// --- complex shifted QR on the Hessenberg form -------------------------------
CVec9 qr_eigenvalues(const Mat9& hess) {
  CMat9 h;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) h(i, j) = hess(i, j);

  double anorm = 0.0;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) anorm = std::max(anorm, std::abs(h(i, j)));
  if (anorm == 0.0) return CVec9{};

  CVec9 eig{};
  int hi = kStates - 1;
  int iters = 0;
  while (hi >= 0) {
    // Deflate negligible subdiagonals.
    for (int k = hi; k >= 1; --k) {
      const double small = kEps * (std::abs(h(k - 1, k - 1)) + std::abs(h(k, k)));
      if (std::abs(h(k, k - 1)) <= std::max(small, kEps * anorm * 1e-3)) h(k, k - 1) = 0.0;
    }
    if (hi == 0 || h(hi, hi - 1) == 0.0) {
      eig[hi] = h(hi, hi);
      --hi;
      iters = 0;
      continue;
    }
    if (++iters > kQrItersPerEigenvalue)
      throw NonConvergence("eigenvalue QR iteration failed to converge");

    int lo = hi;
    while (lo > 0 && h(lo, lo - 1) != 0.0) --lo;

    // Wilkinson shift from the trailing 2x2 block.
    const Complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
    const Complex c = h(hi, hi - 1), d = h(hi, hi);
    const Complex tr = a + d;
    const Complex disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    const Complex m1 = 0.5 * (tr + disc), m2 = 0.5 * (tr - disc);
    Complex mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    if (iters % 16 == 0) mu = d + std::abs(h(hi, hi - 1));  // exceptional shift

    for (int i = lo; i <= hi; ++i) h(i, i) -= mu;

    // Explicit QR step via complex Givens rotations.
    std::array<double, kStates> cs{};
    std::array<Complex, kStates> sn{};
    for (int k = lo; k < hi; ++k) {
      const Complex f = h(k, k), g = h(k + 1, k);
      const double af = std::abs(f), ag = std::abs(g);
      double cc;
      Complex ss;
      if (ag == 0.0) {
        cc = 1.0;
        ss = 0.0;
      } else if (af == 0.0) {
        cc = 0.0;
        ss = std::conj(g) / ag;
      } else {
        const double r = std::hypot(af, ag);
        cc = af / r;
        ss = (f / af) * std::conj(g) / r;
      }
      cs[k] = cc;
      sn[k] = ss;
      for (int j = k; j <= hi; ++j) {
        const Complex t1 = h(k, j), t2 = h(k + 1, j);
        h(k, j) = cc * t1 + ss * t2;
        h(k + 1, j) = -std::conj(ss) * t1 + cc * t2;
      }
    }
    for (int k = lo; k < hi; ++k) {
      const int top = std::min(k + 2, hi);
      for (int i = lo; i <= top; ++i) {
        const Complex t1 = h(i, k), t2 = h(i, k + 1);
        h(i, k) = cs[k] * t1 + std::conj(sn[k]) * t2;
        h(i, k + 1) = -sn[k] * t1 + cs[k] * t2;
      }
    }

    for (int i = lo; i <= hi; ++i) h(i, i) += mu;
  }
  return eig;
}

// --- complex LU machinery ----------------------------------------------------
struct CLu {
  CMat9 lu;
  std::array<int, kStates> piv{};
  bool singular = false;
};

CLu clu_factor(CMat9 a, double pivot_floor) {
  CLu f;
  for (int k = 0; k < kStates; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < kStates; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    f.piv[k] = p;
    if (p != k)
      for (int j = 0; j < kStates; ++j) std::swap(a(k, j), a(p, j));
    if (std::abs(a(k, k)) < pivot_floor) {
      a(k, k) = pivot_floor;  // shift a hard-singular pivot off zero
      f.singular = true;
    }
    const Complex inv = 1.0 / a(k, k);
    for (int i = k + 1; i < kStates; ++i) {
      const Complex l = a(i, k) * inv;
      a(i, k) = l;
      if (l == Complex{}) continue;
      for (int j = k + 1; j < kStates; ++j) a(i, j) -= l * a(k, j);
    }
  }
  f.lu = a;
  return f;
}

CVec9 clu_solve(const CLu& f, CVec9 b) {
  for (int k = 0; k < kStates; ++k)
    if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
  for (int i = 1; i < kStates; ++i)
    for (int j = 0; j < i; ++j) b[i] -= f.lu(i, j) * b[j];
  for (int i = kStates - 1; i >= 0; --i) {
    for (int j = i + 1; j < kStates; ++j) b[i] -= f.lu(i, j) * b[j];
    b[i] /= f.lu(i, i);
  }
  return b;
}

CMat9 cinverse(const CMat9& a) {
  const CLu f = clu_factor(a, 0.0);
  CMat9 inv;
  for (int c = 0; c < kStates; ++c) {
    CVec9 e{};
    e[c] = 1.0;
    const CVec9 x = clu_solve(f, e);
    for (int r = 0; r < kStates; ++r) inv(r, c) = x[r];
  }
  return inv;
}

// One Newton step X <- X (2I - S X) tightens ||S X - I|| to rounding level.
CMat9 refine_inverse(const CMat9& s, const CMat9& x) {
  CMat9 t;  // 2I - S X
  const CMat9 sx = s * x;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) t(i, j) = (i == j ? 2.0 : 0.0) - sx(i, j);
  return x * t;
}

CVec9 inverse_iteration(const Mat9& a, Complex lambda, double anorm, int worker) {
  // (a - lambda I) with a floor keeping the factorization usable when
  // lambda is an exact eigenvalue.
  CMat9 shifted;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) shifted(i, j) = Complex(a(i, j)) - (i == j ? lambda : Complex{});
  const CLu f = clu_factor(shifted, kEps * anorm * 1e-2 + 1e-300);

  // Deterministic quasi-random start, decorrelated per eigenvalue.
  CVec9 x;
  unsigned long long seed = 0x9e3779b97f4a7c15ULL * (worker + 1);
  for (int i = 0; i < kStates; ++i) {
    seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    x[i] = Complex(1.0 + double(seed >> 40) * 0x1p-24, double((seed >> 16) & 0xffffff) * 0x1p-25);
  }

  for (int it = 0; it < 4; ++it) {
    x = clu_solve(f, x);
    double nrm = 0.0;
    for (const Complex& v : x) nrm += std::norm(v);
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NonConvergence("inverse iteration broke down");
    for (Complex& v : x) v /= nrm;
    // Residual small enough -> done.
    double res = 0.0;
    for (int i = 0; i < kStates; ++i) {
      Complex s = -lambda * x[i];
      for (int j = 0; j < kStates; ++j) s += a(i, j) * x[j];
      res += std::norm(s);
    }
    if (std::sqrt(res) <= 64.0 * kEps * (anorm + std::abs(lambda))) break;
  }

  // Fix the phase: largest component made real positive, for a reproducible
  // table layout.
  int imax = 0;
  double vmax = 0.0;
  for (int i = 0; i < kStates; ++i) {
    const double v = std::abs(x[i]);
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
  }
  const Complex phase = std::abs(x[imax]) / x[imax];
  for (Complex& v : x) v *= phase;
  return x;
}

}  // namespace

EigenDecomposition decompose(const Mat9& a) {
  for (double v : a.m)
    if (!std::isfinite(v)) throw std::invalid_argument("decompose: non-finite matrix entry");

  const double afro = frobenius_norm(a);
  EigenDecomposition e;
  if (afro == 0.0) {  // zero matrix: trivial decomposition
    e.vectors = CMat9::identity();
    e.inverse = CMat9::identity();
    return e;
  }

  Mat9 balanced = a;
  Vec9 scale;
  balance(balanced, scale);

  Mat9 hess = balanced;
  hessenberg(hess);
  CVec9 values = qr_eigenvalues(hess);

  std::array<int, kStates> order{};
  for (int i = 0; i < kStates; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (values[x].real() != values[y].real()) return values[x].real() > values[y].real();
    return values[x].imag() < values[y].imag();
  });

  // Eigenvectors by inverse iteration on the original (unbalanced) matrix:
  // this keeps the per-pair residuals small in the basis the reconstruction
  // contract is stated in. Balancing is only used to sharpen the QR
  // eigenvalues above.
  const double anorm = max_abs(a);
  for (int k = 0; k < kStates; ++k) {
    const Complex lambda = values[order[k]];
    e.values[k] = lambda;
    const CVec9 x = inverse_iteration(a, lambda, anorm, k);
    for (int i = 0; i < kStates; ++i) e.vectors(i, k) = x[i];
  }

  // Diagonalizability guards: eigenvalue gap and conditioning of S.
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kStates; ++i)
    for (int j = i + 1; j < kStates; ++j)
      min_gap = std::min(min_gap, std::abs(e.values[i] - e.values[j]));
  if (min_gap < 1e-8 * afro)
    throw NearDefective("eigenvalue gap below 1e-8*||A||_F, rejecting diagonalization");

  e.inverse = cinverse(e.vectors);
  e.inverse = refine_inverse(e.vectors, e.inverse);

  const double cond = frobenius_norm(e.vectors) * frobenius_norm(e.inverse);
  if (!(cond < 1e12)) throw NearDefective("eigenvector matrix condition exceeds 1e12");

  CMat9 identity_residual = e.vectors * e.inverse;
  for (int i = 0; i < kStates; ++i) identity_residual(i, i) -= 1.0;
  if (frobenius_norm(identity_residual) > 1e-10)
    throw NonConvergence("S * S^-1 deviates from identity beyond 1e-10");

  if (reconstruction_residual(a, e) > 1e-10 * std::max(1.0, afro))
    throw NonConvergence("eigendecomposition residual exceeds 1e-10*max(1,||A||_F)");

  return e;
}

double reconstruction_residual(const Mat9& a, const EigenDecomposition& e) {
  CMat9 sd;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) sd(i, j) = e.vectors(i, j) * e.values[j];
  const CMat9 rec = sd * e.inverse;
  double s = 0.0;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) s += std::norm(rec(i, j) - a(i, j));
  return std::sqrt(s);
}

Mat9 exp_via_eig(const EigenDecomposition& e, double dt, double* imag_residue) {
  if (dt < 0.0) throw std::invalid_argument("exp_via_eig: negative dt");
  CVec9 ez;
  for (int j = 0; j < kStates; ++j) ez[j] = std::exp(e.values[j] * dt);
  CMat9 sd;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) sd(i, j) = e.vectors(i, j) * ez[j];
  const CMat9 t = sd * e.inverse;
  double res = 0.0;
  Mat9 out;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) {
      res = std::max(res, std::fabs(t(i, j).imag()));
      out(i, j) = t(i, j).real();
    }
  if (imag_residue) *imag_residue = res;
  if (res > 1e-10) throw ImagResidueExceeded("imaginary residue " + std::to_string(res) +
                                             " after real cast of S exp(D dt) S^-1");
  return out;
}

Mat9 exp_reference(const Mat9& a, double dt) {
  if (dt < 0.0) throw std::invalid_argument("exp_reference: negative dt");
  Mat9 m = dt * a;
  const double nrm = inf_norm(m);
  if (!std::isfinite(nrm) || nrm > 1e6)
    throw std::invalid_argument("exp_reference: ||A*dt|| too large");

  int squarings = 0;
  if (nrm > 0.25) {
    squarings = int(std::ceil(std::log2(nrm / 0.25)));
    const double f = std::ldexp(1.0, -squarings);
    m = f * m;
  }

  Mat9 result = Mat9::identity();
  Mat9 term = Mat9::identity();
  for (int k = 1; k <= 40; ++k) {
    term = (1.0 / k) * (term * m);
    const double tn = inf_norm(term);
    for (int i = 0; i < kStates * kStates; ++i) result.m[i] += term.m[i];
    if (tn <= kEps * 0.5) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace mcina
