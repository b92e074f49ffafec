#include "mcina/error_analysis.hpp"

#include <cmath>
#include <limits>

namespace mcina {

double frobenius(const Mat9& m) { return frobenius_norm(m); }

double os_error_coefficient(const Mat9& fast_high, const Mat9& fast_low, const Mat9& slow) {
  const Mat9 total = commutator(fast_low, fast_high) + commutator(slow, fast_high) +
                     commutator(slow, fast_low);
  return 0.5 * spectral_norm(total);
}

// The coefficients use the spectral norm. The derivations hold for any
// submultiplicative norm; the spectral choice is the one under which the
// reference action potential reproduces the published coefficient maxima
// (the Frobenius norm overestimates ||A|| by the spread of the spectrum and
// cannot hit the FE and splitting maxima simultaneously).
ErrorCoefficients error_coeffs(double vm, double dvdt) {
  const SplitGenerators g = assemble_split(eval_rates(vm));
  const GeneratorDerivative d = generator_derivative(vm);
  const double vdot = std::fabs(dvdt);

  ErrorCoefficients e;
  const double a_norm = spectral_norm(g.full);
  e.fe = 0.5 * (a_norm * a_norm + spectral_norm(d.full) * vdot);
  e.mrl = 0.5 * spectral_norm(d.full) * vdot;
  e.os = os_error_coefficient(g.fast_high, g.fast_low, g.slow);
  const double slow_norm = spectral_norm(g.slow);
  e.hos = 0.5 * vdot *
              (spectral_norm(d.fast_high) + spectral_norm(d.fast_low) +
               spectral_norm(d.slow)) +
          0.5 * slow_norm * slow_norm + e.os;
  return e;
}

ErrorTraceResult error_trace(const Trace& trace, double t_from, double t_to) {
  ErrorTraceResult res;
  std::vector<TraceSample> s;
  s.reserve(trace.samples.size());
  for (const TraceSample& x : trace.samples)
    if (x.t >= t_from && x.t <= t_to) s.push_back(x);
  const size_t n = s.size();
  res.samples.reserve(n);
  res.min_fe_over_mrl = std::numeric_limits<double>::infinity();
  res.min_fe_over_hos = std::numeric_limits<double>::infinity();

  for (size_t i = 0; i < n; ++i) {
    double dvdt = 0.0;
    if (n >= 2) {
      const size_t lo = i == 0 ? 0 : i - 1;
      const size_t hi = i + 1 == n ? i : i + 1;
      dvdt = (s[hi].vm - s[lo].vm) / (s[hi].t - s[lo].t);
    }
    ErrorSample out;
    out.t = s[i].t;
    out.vm = s[i].vm;
    out.dvdt = dvdt;
    out.err = error_coeffs(s[i].vm, dvdt);
    res.samples.push_back(out);

    res.maxima.fe = std::max(res.maxima.fe, out.err.fe);
    res.maxima.mrl = std::max(res.maxima.mrl, out.err.mrl);
    res.maxima.hos = std::max(res.maxima.hos, out.err.hos);
    res.maxima.os = std::max(res.maxima.os, out.err.os);
    if (out.err.mrl > 1e-6) res.min_fe_over_mrl = std::min(res.min_fe_over_mrl, out.err.fe / out.err.mrl);
    if (out.err.hos > 1e-6) res.min_fe_over_hos = std::min(res.min_fe_over_hos, out.err.fe / out.err.hos);
  }
  return res;
}

}  // namespace mcina
