#pragma once

// Markov-chain timesteppers: forward Euler, matrix Rush-Larsen via tabulated
// eigendecompositions, and hybrid operator splitting with closed-form
// exponentials for the two fast sub-chains.

#include <stdexcept>

#include "mcina/tables.hpp"

namespace mcina {

enum class Method { ForwardEuler, MatrixRushLarsen, HybridOperatorSplitting };

struct MethodConfig {
  Method method = Method::ForwardEuler;
  double dt = 0.01;        // ms
  bool tabulated = false;  // FE/HOS may take rates or coefficients from tables;
                           // MRL always steps through a StepperTable
};

// A denominator in the closed-form substep coefficients fell below the
// degeneracy threshold; the caller should step that substep through a matrix
// exponential instead.
class DegenerateRates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |denominator| below this is treated as a rate collision. The closed forms
// only divide by differences of distinct activation rates, which collide at
// three isolated potentials, so this path never triggers on grid voltages.
inline constexpr double kDegenerateRateEps = 1e-7;  // ms^-1

// One explicit Euler step u + dt*A*u.
StateOccupancy step_fe(const StateOccupancy& u, const Mat9& a, double dt);

// Same step evaluated from the sparse right-hand side; this is the form the
// whole-cell solver uses (22 rate terms instead of a dense 9x9 product).
StateOccupancy step_fe(const StateOccupancy& u, const RateSet& r, double dt);

// Matrix Rush-Larsen: u' = T_j u with T_j the tabulated exp(A dt) nearest vm.
StateOccupancy step_mrl(const StateOccupancy& u, const StepperTable& stepper, double vm);

// Closed-form coefficients of exp(A0*dt): decay factors m and transfer
// weights k along the chains R->Q->P->O->U and S->T->U.
struct FastHighCoeffs {
  double m_ou, m_po, m_qp, m_rq, m_st, m_tu;
  double k_po, k_qo, k_ro;
  double k_qp, k_rp;
  double k_rq;
  double k_st, k_su;
  double k_pu, k_qu, k_ru;
};

// Closed-form coefficients of exp(A1*dt): chains O->P->Q->R and U->T->S.
struct FastLowCoeffs {
  double m_op, m_pq, m_qr, m_ts, m_ut;
  double l_op, l_oq, l_pq;
  double l_or, l_pr;
  double l_us, l_ut;
};

// Throw DegenerateRates when a coefficient denominator collides.
FastHighCoeffs fast_high_coeffs(const RateSet& r, double dt);
FastLowCoeffs fast_low_coeffs(const RateSet& r, double dt);

StateOccupancy apply_fast_high(const StateOccupancy& u, const FastHighCoeffs& c);
StateOccupancy apply_fast_low(const StateOccupancy& u, const FastLowCoeffs& c);

// exp(A0*dt)*u and exp(A1*dt)*u through the closed forms above.
StateOccupancy hos_fast_high(const StateOccupancy& u, const RateSet& r, double dt);
StateOccupancy hos_fast_low(const StateOccupancy& u, const RateSet& r, double dt);

// Euler step on the uniformly slow part A2.
StateOccupancy hos_slow(const StateOccupancy& u, const RateSet& r, double dt);

// Full hybrid step: slow o fast_low o fast_high, all rates frozen at the same
// vm. Degenerate substeps fall back to an eigendecomposition exponential of
// the affected split matrix (reference exponential if that also fails).
StateOccupancy step_hos(const StateOccupancy& u, const RateSet& r, double dt);

// Rush-Larsen update of a Hodgkin-Huxley gate: exact relaxation toward yss
// with time constant tau at frozen potential.
double step_gate_rl(double y, double yss, double tau, double dt);

// Per-voltage tabulation of the full analytic coefficient set for one dt,
// the fastest way to run HOS. Entries whose closed form is degenerate carry
// dense exponential fallbacks instead (not hit on this model's grids).
struct HosCoeffTable {
  struct DenseFallback {
    std::uint32_t index;
    Mat9 fast_high;
    Mat9 fast_low;
  };

  VoltageGrid grid;
  double dt = 0.0;
  std::vector<FastHighCoeffs> high;
  std::vector<FastLowCoeffs> low;
  std::vector<RateSet> rates;  // slow-substep rates per voltage
  std::vector<DenseFallback> fallbacks;
  std::vector<bool> degenerate;
};

HosCoeffTable build_hos_coeff_table(const VoltageGrid& grid, double dt);

// One tabulated hybrid step at the grid entry nearest vm.
StateOccupancy step_hos(const StateOccupancy& u, const HosCoeffTable& table, double vm);

}  // namespace mcina
