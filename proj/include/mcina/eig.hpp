#pragma once

// Eigendecomposition of small dense real nonsymmetric matrices, and matrix
// exponentials built from it. decompose() is the workhorse behind the
// voltage tables; exp_reference() is an independent scaling-and-squaring
// exponential used to cross-check everything built on eigenvalues.

#include <stdexcept>
#include <string>

#include "mcina/linalg.hpp"

namespace mcina {

class EigenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// QR iteration cap reached, or the computed factors fail the residual check.
class NonConvergence : public EigenError {
 public:
  using EigenError::EigenError;
};

// Eigenvalue cluster too tight or eigenvector matrix too ill-conditioned to
// trust a diagonalization at this input.
class NearDefective : public EigenError {
 public:
  using EigenError::EigenError;
};

// Imaginary residue left over when casting S exp(D dt) S^-1 back to a real
// matrix exceeded tolerance; indicates inconsistent eigen-pairing.
class ImagResidueExceeded : public EigenError {
 public:
  using EigenError::EigenError;
};

struct EigenDecomposition {
  CVec9 values;   // eigenvalues, sorted by descending real part, ties by
                  // ascending imaginary part (fixed layout for serialization)
  CMat9 vectors;  // S: eigenvectors as columns
  CMat9 inverse;  // S^-1

  bool operator==(const EigenDecomposition& o) const {
    return values == o.values && vectors.m == o.vectors.m && inverse.m == o.inverse.m;
  }
};

// Diagonalize a. Throws NonConvergence / NearDefective.
// Contract: ||a - S D S^-1||_F <= 1e-10 * max(1, ||a||_F) and
// ||S S^-1 - I||_F <= 1e-10.
EigenDecomposition decompose(const Mat9& a);

// Re(S exp(D dt) S^-1). Throws ImagResidueExceeded if the imaginary residue
// discarded by the real cast exceeds 1e-10; the residue actually seen can be
// retrieved through imag_residue.
Mat9 exp_via_eig(const EigenDecomposition& e, double dt, double* imag_residue = nullptr);

// Independent matrix exponential: scaling and squaring with a Taylor core.
// Accurate to ~1e-12 relative for ||a*dt|| up to ~50. Throws
// std::invalid_argument for dt < 0 or unusably large ||a*dt||.
Mat9 exp_reference(const Mat9& a, double dt);

// ||a - S D S^-1||_F, used by table builders and tests.
double reconstruction_residual(const Mat9& a, const EigenDecomposition& e);

}  // namespace mcina
