#include "mcina/mc_model.hpp"

#include <cmath>

namespace mcina {

RateSet eval_rates(double vm) {
  if (!std::isfinite(vm)) throw std::invalid_argument("eval_rates: non-finite membrane potential");

  RateSet r;
  r.a11 = 3.802 / (0.1027 * std::exp(-vm / 17.0) + 0.20 * std::exp(-vm / 150.0));
  r.a12 = 3.802 / (0.1027 * std::exp(-vm / 15.0) + 0.23 * std::exp(-vm / 150.0));
  r.a13 = 3.802 / (0.1027 * std::exp(-vm / 12.0) + 0.25 * std::exp(-vm / 150.0));
  r.b11 = 0.1917 * std::exp(-vm / 20.3);
  r.b12 = 0.20 * std::exp(-(vm - 5.0) / 20.3);
  r.b13 = 0.22 * std::exp(-(vm - 10.0) / 20.3);
  r.a3 = 3.7933e-7 * std::exp(-vm / 7.7);
  r.b3 = 8.4e-3 + 2e-5 * vm;
  r.a2 = 9.178 * std::exp(vm / 29.68);
  r.b2 = r.a13 * r.a2 * r.a3 / (r.b13 * r.b3);
  r.a4 = r.a2 / 100.0;
  r.b4 = r.a3;
  r.a5 = r.a2 / 9.5e4;
  r.b5 = r.a3 / 50.0;
  return r;
}

namespace {

// Fix the diagonal of each column to the negated sum of that column's
// off-diagonal entries.
void close_columns(Mat9& a) {
  for (int c = 0; c < kStates; ++c) {
    double s = 0.0;
    for (int rw = 0; rw < kStates; ++rw)
      if (rw != c) s += a(rw, c);
    a(c, c) = -s;
  }
}

}  // namespace

SplitGenerators assemble_split(const RateSet& r) {
  SplitGenerators g;

  // Fast at high potentials: chains R->Q->P->O->U and S->T->U.
  Mat9& h = g.fast_high;
  h(O, P) = r.a13;  // P->O
  h(P, Q) = r.a12;  // Q->P
  h(Q, R) = r.a11;  // R->Q
  h(T, S) = r.a11;  // S->T
  h(U, T) = r.a12;  // T->U
  h(U, O) = r.a2;   // O->U
  close_columns(h);

  // Fast at low potentials: chains O->P->Q->R and U->T->S.
  Mat9& l = g.fast_low;
  l(P, O) = r.b13;  // O->P
  l(Q, P) = r.b12;  // P->Q
  l(R, Q) = r.b11;  // Q->R
  l(S, T) = r.b11;  // T->S
  l(T, U) = r.b12;  // U->T
  close_columns(l);

  // Uniformly slow rates, including the V/W tail of the chain.
  Mat9& s = g.slow;
  s(O, U) = r.b2;  // U->O
  s(P, U) = r.a3;  // U->P
  s(Q, T) = r.a3;  // T->Q
  s(R, S) = r.a3;  // S->R
  s(S, R) = r.b3;  // R->S
  s(T, Q) = r.b3;  // Q->T
  s(U, P) = r.b3;  // P->U
  s(U, V) = r.b4;  // V->U
  s(V, U) = r.a4;  // U->V
  s(V, W) = r.b5;  // W->V
  s(W, V) = r.a5;  // V->W
  close_columns(s);

  g.full = g.fast_high + g.fast_low + g.slow;
  return g;
}

Mat9 assemble_full(const RateSet& r) { return assemble_split(r).full; }

// TODO: the rate formulas differentiate in closed form; swap the analytic
// derivatives in behind this interface once they are transcribed and checked.
GeneratorDerivative generator_derivative(double vm, double step) {
  const SplitGenerators hi = assemble_split(eval_rates(vm + step));
  const SplitGenerators lo = assemble_split(eval_rates(vm - step));
  const double inv = 1.0 / (2.0 * step);
  GeneratorDerivative d;
  d.full = inv * (hi.full - lo.full);
  d.fast_high = inv * (hi.fast_high - lo.fast_high);
  d.fast_low = inv * (hi.fast_low - lo.fast_low);
  d.slow = inv * (hi.slow - lo.slow);
  return d;
}

}  // namespace mcina
