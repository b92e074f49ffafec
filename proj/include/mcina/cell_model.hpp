#pragma once

// Whole-cell ventricular action-potential model hosting the INa Markov
// chain. The formulation follows the Luo-Rudy dynamic model (Circ Res 1994)
// with the updates of Zeng et al. 1995 and Viswanathan et al. 1999, in the
// exact variant used by the Clancy-Rudy 2002 INa study, including its
// hard-coded EKs concentrations, the GKs x0.615 heterogeneity factor, the
// fss exponent of 8 and the Na/Ca exchanger with gamma = 0.15.
//
// Units: time ms, potentials mV, concentrations mmol/L, currents uA/uF
// (membrane currents are per specific capacitance Cm = 1 uF/cm^2).

#include <string>
#include <vector>

#include "mcina/solvers.hpp"

namespace mcina {

struct CellState {
  double t = 0.0;    // ms
  double vm = 0.0;   // mV
  double nai = 0.0;  // mmol/L
  double ki = 0.0;
  double cai = 0.0;
  double cansr = 0.0;
  double cajsr = 0.0;
  // Hodgkin-Huxley gates
  double d = 0.0, f = 0.0;    // L-type Ca
  double b = 0.0, g = 0.0;    // T-type Ca
  double xr = 0.0;            // rapid delayed rectifier
  double xs1 = 0.0, xs2 = 0.0;  // slow delayed rectifier
  StateOccupancy mc{};        // INa Markov chain occupancies

  // Ca-induced-Ca-release clock: time since the last significant local
  // maximum of dV/dt, plus the detector's bookkeeping.
  double tc = 0.0;          // ms
  double prev_dvdt = 0.0;   // mV/ms at the previous step
  double t_last_reset = 0.0;
};

struct CellConfig {
  // Maximal INa conductance, mS/uF. Calibrated against the reference
  // single-cell action potential (see README); not taken from the source
  // model papers, which leave it to the implementation.
  double gna = 28.0;
  // Transient outward current hook. It appears in the potassium flux balance
  // but has no definition in the source model; off by default.
  double ito = 0.0;
  // Advance HH gates by Rush-Larsen (the scheme of the source model codes,
  // unconditionally stable) or plain forward Euler.
  bool gates_rush_larsen = true;
  double stim_vm = -35.0;  // potential right after the K+ injection, mV
  // Treat vm outside [-150, 100] as a detected instability. Disable when
  // probing raw large-timestep divergence, where bounded excursions beyond
  // the physiological band are the expected (wrong but stable) behavior.
  bool vm_band_guard = true;
};

// Membrane currents [uA/uF], SR fluxes [mmol/L/ms], and the calcium update
// bookkeeping for one step; everything evaluated at the state's frozen vm.
struct Currents {
  double ina = 0;
  double inak = 0;
  double iks = 0, ikr = 0, ik1 = 0, ikp = 0;
  double ilca = 0, ilcak = 0, ilcana = 0, ical = 0;  // L-type parts and total
  double icat = 0;
  double inaca = 0;
  double insna = 0, ikns = 0;  // nonspecific Ca-activated
  double ipca = 0, icab = 0, inab = 0;
  double irel = 0, iup = 0, ileak = 0, itr = 0;  // SR fluxes
  double itna = 0, itk = 0, itca = 0;  // per-ion totals
  double itot = 0;                     // drives dV/dt = -itot
  double dcai = 0, dcajsr = 0;         // buffered-update increments (dt-scaled)
};

// Initial values of the quiescent cell. The Markov chain vector is
// normalized so the occupancies sum to exactly 1; the raw published values
// (sum ~ 1.0000331) stay available below.
CellState init_state();
extern const StateOccupancy kRawInitialOccupancy;

Currents compute_currents(const CellState& s, const CellConfig& cfg, double dt);

// Instantaneous K+ injection: vm jumps to cfg.stim_vm and ki absorbs the
// corresponding membrane charge, dKi = dVm * Acap / (Vmyo * F).
void apply_stimulus(CellState& s, const CellConfig& cfg);

// Advance the CICR clock; reset it when dV/dt just passed a significant
// (> 1 mV/ms) local maximum. A 10 ms refractory guard suppresses chatter.
void update_cicr_timer(CellState& s, double dvdt, double dt);

// Release-gate factors of the CICR current; open*close peaks 4 ms after the
// last clock reset and their sum is identically 1.
double ryr_open(double tc);
double ryr_close(double tc);

enum class StepOutcome {
  Ok,
  Instability,  // non-finite state, vm outside [-150, 100], or ||mc|| blowup
  Unphysical,   // a concentration reached zero or below while still finite
};

// Read-only tables shared by concurrent simulations. Which ones must be set
// depends on the method/tabulated combination; MRL always needs stepper.
struct SolverTables {
  const StepperTable* stepper = nullptr;
  const RateTable* rates = nullptr;          // tabulated FE / HOS rate lookups
  const HosCoeffTable* hos_coeffs = nullptr; // fully tabulated HOS
};

// One full timestep: currents at frozen vm, Markov chain by the configured
// method, gates, concentrations with buffered Ca updates, vm, CICR clock.
// When ina_ns is given, the wall time of the Markov-chain advance (the "INa
// model" share of the step) is accumulated into it.
StepOutcome step_cell(CellState& s, const MethodConfig& mc_cfg, const CellConfig& cell_cfg,
                      const SolverTables& tables, long long* ina_ns = nullptr);

struct Protocol {
  int pulses = 1;
  double cycle_length = 1000.0;  // ms
  double dt = 0.01;              // ms
  Method method = Method::ForwardEuler;
  bool tabulated = false;
  int record_stride = 1;         // record every n-th step; <= 0 disables
  double duration = -1.0;        // ms; defaults to pulses*CL (or one CL if 0 pulses)
};

struct TraceSample {
  double t, vm, ina;
  StateOccupancy mc;
  double cons_err;  // sum(mc) - 1
  double nai, ki, cai, cansr, cajsr;
};

enum class RunStatus { Completed, Instability, Unphysical };

struct Trace {
  std::vector<TraceSample> samples;
  RunStatus status = RunStatus::Completed;
  double end_time = 0.0;      // where the run finished or failed, ms
  double max_cons_err = 0.0;  // max |sum(mc) - 1| seen
  double min_occupancy = 0.0; // most negative Markov-state component seen
  long long steps = 0;
  long long clamped_lookups = 0;  // vm outside the table range
  double ina_seconds = 0.0;   // wall time inside the INa model update
  double total_seconds = 0.0;
};

// Run the pacing protocol: stimulus at t = 1 ms of each cycle. On failure
// the trace is truncated at the failing step and flagged.
Trace simulate(const Protocol& protocol, const CellConfig& cfg, const SolverTables& tables);

// Trace CSV: fixed header, full round-trip precision.
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);  // samples + status columns only

extern const char* const kTraceCsvHeader;

}  // namespace mcina
