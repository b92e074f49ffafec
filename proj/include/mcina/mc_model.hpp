#pragma once

// Clancy-Rudy (2002) INa Markov chain: voltage-dependent transition rates
// and assembly of the 9x9 generator, full and split into fast/slow parts.

#include <stdexcept>

#include "mcina/linalg.hpp"

namespace mcina {

// The 14 distinct transition rates, ms^-1. Several chain edges share a
// definition; directional aliases:
//   a11 = rate(R->Q) = rate(S->T)      b11 = rate(Q->R) = rate(T->S)
//   a12 = rate(Q->P) = rate(T->U)      b12 = rate(P->Q) = rate(U->T)
//   a13 = rate(P->O)                   b13 = rate(O->P)
//   a2  = rate(O->U)                   b2  = rate(U->O)
//   a3  = rate(U->P) = rate(T->Q) = rate(S->R)
//   b3  = rate(P->U) = rate(Q->T) = rate(R->S)
//   a4  = rate(U->V)                   b4  = rate(V->U)
//   a5  = rate(V->W)                   b5  = rate(W->V)
struct RateSet {
  double a11, a12, a13;
  double b11, b12, b13;
  double a2, b2;
  double a3, b3;
  double a4, b4;
  double a5, b5;
};

// Evaluate all transition rates at transmembrane potential vm [mV].
// The derived rates satisfy b2 = a13*a2*a3/(b13*b3), a4 = a2/100, b4 = a3,
// a5 = a2/9.5e4, b5 = a3/50 by construction.
RateSet eval_rates(double vm);

// Generator split by rate speed: fast_high holds the rates that are fast at
// high potentials (the R->Q->P->O->U and S->T->U chains), fast_low the rates
// fast at low potentials (O->P->Q->R and U->T->S), slow everything else.
// full == fast_high + fast_low + slow entrywise, bitwise.
struct SplitGenerators {
  Mat9 full;
  Mat9 fast_high;  // A0
  Mat9 fast_low;   // A1
  Mat9 slow;       // A2
};

SplitGenerators assemble_split(const RateSet& r);

// Full generator of the master equation du/dt = A(vm) u. Diagonal entries are
// negated column sums of the off-diagonal entries, never independent
// formulas, so every column sums to zero up to rounding.
Mat9 assemble_full(const RateSet& r);

// d/dV of the generator and of its split parts, by central differences.
struct GeneratorDerivative {
  Mat9 full;
  Mat9 fast_high;
  Mat9 fast_low;
  Mat9 slow;
};

// step is the finite-difference half-width in mV.
GeneratorDerivative generator_derivative(double vm, double step = 1e-3);

}  // namespace mcina
