#pragma once

// A priori local-truncation-error coefficients of the three timesteppers.
// Each scheme's one-step error is err * dt^2 + O(dt^3); the coefficients
// combine Frobenius norms of the generator, its voltage derivative scaled by
// the local dV/dt, and (for the split scheme) the commutators of the parts.

#include <vector>

#include "mcina/cell_model.hpp"
#include "mcina/mc_model.hpp"

namespace mcina {

double frobenius(const Mat9& m);

struct ErrorCoefficients {
  double fe = 0.0;   // ms^-2
  double mrl = 0.0;
  double hos = 0.0;
  double os = 0.0;   // operator-splitting share of hos
};

// Splitting error coefficient 0.5 * ||[A1,A0] + [A2,A0] + [A2,A1]||_F.
double os_error_coefficient(const Mat9& fast_high, const Mat9& fast_low, const Mat9& slow);

// Coefficients at one membrane potential and local voltage slew rate.
ErrorCoefficients error_coeffs(double vm, double dvdt);

struct ErrorSample {
  double t, vm, dvdt;
  ErrorCoefficients err;
};

struct ErrorTraceResult {
  std::vector<ErrorSample> samples;
  ErrorCoefficients maxima;
  // Minima of fe/mrl and fe/hos over samples whose denominator exceeds
  // 1e-6 ms^-2 (mrl vanishes wherever the potential is flat).
  double min_fe_over_mrl = 0.0;
  double min_fe_over_hos = 0.0;
};

// Evaluate the coefficients along a recorded trace; dV/dt comes from central
// differences of the trace at its own stride. The optional window restricts
// the evaluation to t in [t_from, t_to]; use it to cut out the instantaneous
// stimulus jump, which a finite difference would read as a huge dV/dt.
ErrorTraceResult error_trace(const Trace& trace, double t_from = -1e300, double t_to = 1e300);

}  // namespace mcina
