#include "mcina/cell_model.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mcina {

namespace {

// Standard ionic concentrations [mmol/L]
constexpr double kNao = 140.0;
constexpr double kKo = 4.5;
constexpr double kCao = 1.8;

// Physical constants
constexpr double kRgas = 8314.0;   // mJ/(mol K)
constexpr double kFaraday = 96485.0;
constexpr double kTemp = 310.0;    // K
constexpr double kRTF = kRgas * kTemp / kFaraday;  // mV

// Cell geometry
constexpr double kPi = 3.14159265358979323846;
constexpr double kLength = 0.01;    // cm
constexpr double kRadius = 0.0011;  // cm
constexpr double kVcell = 3.801e-5; // uL
const double kAgeo = 2.0 * kPi * kRadius * kRadius + 2.0 * kPi * kRadius * kLength;  // cm^2
const double kAcap = 2.0 * kAgeo;   // cm^2
constexpr double kVmyo = 2.58468e-5;       // uL
constexpr double kVnsr = 0.0552 * kVcell;  // uL
constexpr double kVjsr = 0.0048 * kVcell;  // uL

constexpr double kPrnak = 0.01833;

// GHK-type driving term perm * z^2 * vm * F^2/(R T) * (gi ci e^{z vm/RTF} - go co)
// / (e^{z vm/RTF} - 1), with the removable singularity at vm = 0 patched.
double ghk_flux(double vm, double z, double perm, double gi, double ci, double go, double co) {
  if (std::fabs(vm) < 1e-9) return perm * z * kFaraday * (gi * ci - go * co);
  const double ex = std::exp(z * vm / kRTF);
  return perm * z * z * (vm * kFaraday * kFaraday / (kRgas * kTemp)) * (gi * ci * ex - go * co) /
         (ex - 1.0);
}

struct GateRates {
  double dss, taud, fss, tauf;
  double bss, taub, gss, taug;
  double xrss, tauxr;
  double xs1ss, tauxs1, xs2ss, tauxs2;
};

GateRates gate_rates(double vm) {
  GateRates g;

  // L-type Ca gates
  g.dss = 1.0 / (1.0 + std::exp(-(vm + 10.0) / 6.24));
  if (std::fabs(vm + 10.0) < 1e-6) {
    g.taud = g.dss / (6.24 * 0.035);  // limit of the 0/0 form below
  } else {
    g.taud = g.dss * (1.0 - std::exp(-(vm + 10.0) / 6.24)) / (0.035 * (vm + 10.0));
  }
  g.fss = 1.0 / (1.0 + std::exp((vm + 32.0) / 8.0)) + 0.6 / (1.0 + std::exp((50.0 - vm) / 20.0));
  {
    const double arg = 0.0337 * (vm + 10.0);
    g.tauf = 1.0 / (0.0197 * std::exp(-arg * arg) + 0.02);
  }

  // T-type Ca gates
  g.bss = 1.0 / (1.0 + std::exp(-(vm + 14.0) / 10.8));
  g.taub = 3.7 + 6.1 / (1.0 + std::exp((vm + 25.0) / 4.5));
  g.gss = 1.0 / (1.0 + std::exp((vm + 60.0) / 5.6));
  g.taug = vm <= 0.0 ? -0.875 * vm + 12.0 : 12.0;

  // IKr activation
  g.xrss = 1.0 / (1.0 + std::exp(-(vm + 21.5) / 7.5));
  {
    const double t1 = std::fabs(vm + 14.2) < 1e-6
                          ? 0.00138 / 0.123
                          : 0.00138 * (vm + 14.2) / (1.0 - std::exp(-0.123 * (vm + 14.2)));
    const double t2 = std::fabs(vm + 38.9) < 1e-6
                          ? 0.00061 / 0.145
                          : 0.00061 * (vm + 38.9) / (std::exp(0.145 * (vm + 38.9)) - 1.0);
    g.tauxr = 1.0 / (t1 + t2);
  }

  // IKs activation
  g.xs1ss = 1.0 / (1.0 + std::exp(-(vm - 1.5) / 16.7));
  g.xs2ss = g.xs1ss;
  {
    const double t1 = std::fabs(vm + 30.0) < 1e-6
                          ? 0.0000719 / 0.148
                          : 0.0000719 * (vm + 30.0) / (1.0 - std::exp(-0.148 * (vm + 30.0)));
    const double t2 = std::fabs(vm + 30.0) < 1e-6
                          ? 0.000131 / 0.0687
                          : 0.000131 * (vm + 30.0) / (std::exp(0.0687 * (vm + 30.0)) - 1.0);
    g.tauxs1 = 1.0 / (t1 + t2);
  }
  g.tauxs2 = 4.0 * g.tauxs1;

  return g;
}

}  // namespace

const StateOccupancy kRawInitialOccupancy = {
    4.386e-8,  // O
    5.329e-5,  // P  (C1)
    1.064e-2,  // Q  (C2)
    8.018e-1,  // R  (C3)
    1.436e-1,  // S  (IC3)
    1.907e-3,  // T  (IC2)
    1.111e-5,  // U  (IF)
    8.417e-4,  // V  (IM1)
    4.118e-2,  // W  (IM2)
};

CellState init_state() {
  CellState s;
  s.t = 0.0;
  s.vm = -95.0;
  s.nai = 7.9;
  s.ki = 147.23;
  s.cai = 0.00012;
  s.cansr = 1.8;
  s.cajsr = 1.8;
  s.d = 6.17507e-6;
  s.f = 0.999357;
  s.b = 0.00141379;
  s.g = 0.98831;
  s.xr = 2.14606e-4;
  s.xs1 = 0.0;
  s.xs2 = 0.0;
  s.mc = kRawInitialOccupancy;
  const double total = sum(s.mc);
  for (double& u : s.mc) u /= total;
  // Park the CICR clock far past the release window so a run that was never
  // stimulated sees no spontaneous release.
  s.tc = 1000.0;
  s.prev_dvdt = 0.0;
  s.t_last_reset = -1e9;
  return s;
}

double ryr_open(double tc) { return 1.0 / (1.0 + std::exp((-tc + 4.0) / 0.5)); }
double ryr_close(double tc) { return 1.0 - ryr_open(tc); }

Currents compute_currents(const CellState& s, const CellConfig& cfg, double dt) {
  Currents c;
  const double vm = s.vm;

  const double ena = kRTF * std::log(kNao / s.nai);
  c.ina = cfg.gna * (vm - ena) * s.mc[O];

  // Na+-K+ pump
  const double sigma = (std::exp(kNao / 67.3) - 1.0) / 7.0;
  const double fnak = 1.0 / (1.0 + 0.1245 * std::exp(-0.1 * vm / kRTF) +
                             0.0365 * sigma * std::exp(-vm / kRTF));
  c.inak = 1.5 * fnak * (1.0 / (1.0 + std::pow(10.0 / s.nai, 1.5))) * (kKo / (kKo + 1.5));

  // Slow delayed rectifier. EKs keeps the source model's hard-coded
  // concentrations; GKs carries the 0.615 heterogeneity factor.
  const double eks = kRTF * std::log((4.5 + kPrnak * 150.0) / (s.ki + kPrnak * s.nai));
  const double gks = 0.433 * (1.0 + 0.6 / (1.0 + std::pow(0.000038 / s.cai, 1.4))) * 0.615;
  c.iks = gks * s.xs1 * s.xs2 * (vm - eks);

  // Rapid delayed rectifier
  const double gkr = 0.02614 * std::sqrt(kKo / 5.4);
  const double rkr = 1.0 / (1.0 + std::exp((vm + 9.0) / 22.4));
  const double ekr = kRTF * std::log(kKo / s.ki);
  c.ikr = gkr * s.xr * rkr * (vm - ekr);

  // Time-independent K+ current
  const double ek1 = kRTF * std::log(kKo / s.ki);
  const double gk1 = 0.75 * std::sqrt(kKo / 5.4);
  const double ak1 = 1.02 / (1.0 + std::exp(0.2385 * (vm - ek1 - 59.215)));
  const double bk1 = (0.49124 * std::exp(0.08032 * (vm - ek1 + 5.476)) +
                      std::exp(0.06175 * (vm - ek1 - 594.31))) /
                     (1.0 + std::exp(-0.5143 * (vm - ek1 + 4.753)));
  c.ik1 = gk1 * (ak1 / (ak1 + bk1)) * (vm - ek1);

  // Plateau K+ current
  c.ikp = 0.00552 * (1.0 / (1.0 + std::exp((7.488 - vm) / 5.98))) * (vm - ek1);

  // L-type Ca channel (Ca, K and Na components)
  const double fca = 1.0 / (1.0 + s.cai / 0.0006);
  const double ibarca = ghk_flux(vm, 2.0, 5.4e-4, 1.0, s.cai, 0.341, kCao);
  const double ibarna = ghk_flux(vm, 1.0, 6.75e-7, 0.75, s.nai, 0.75, kNao);
  const double ibark = ghk_flux(vm, 1.0, 1.93e-7, 0.75, s.ki, 0.75, kKo);
  c.ilca = s.d * s.f * fca * ibarca;
  c.ilcak = s.d * s.f * fca * ibark;
  c.ilcana = s.d * s.f * fca * ibarna;
  c.ical = c.ilca + c.ilcak + c.ilcana;

  // T-type Ca channel
  const double eca = (kRTF / 2.0) * std::log(kCao / s.cai);
  c.icat = 0.05 * s.b * s.b * s.g * (vm - eca);

  // Na+/Ca2+ exchanger, gamma = 0.15
  {
    const double gamma = 0.15;
    const double e1 = std::exp((gamma - 1.0) * vm / kRTF);
    const double e2 = std::exp(vm / kRTF);
    const double nai3 = s.nai * s.nai * s.nai;
    const double nao3 = kNao * kNao * kNao;
    c.inaca = 2.5e-4 * e1 * (e2 * nai3 * kCao - nao3 * s.cai) /
              (1.0 + 1e-4 * e1 * (e2 * nai3 * kCao + nao3 * s.cai));
  }

  // Nonspecific Ca-activated current
  {
    const double act = 1.0 / (1.0 + std::pow(0.0012 / s.cai, 3.0));
    const double insk = ghk_flux(vm, 1.0, 1.75e-7, 0.75, s.ki, 0.75, kKo);
    const double insna = ghk_flux(vm, 1.0, 1.75e-7, 0.75, s.nai, 0.75, kNao);
    c.ikns = insk * act;
    c.insna = insna * act;
  }

  // Sarcolemmal Ca pump and background currents
  c.ipca = 1.15 * s.cai / (0.0005 + s.cai);
  c.icab = 0.003016 * (vm - eca);
  c.inab = 0.00141 * (vm - ena);

  // NSR uptake/leak and NSR->JSR translocation
  c.iup = 0.00875 * s.cai / (s.cai + 0.00092);
  c.ileak = (0.005 / 15.0) * s.cansr;
  c.itr = (s.cansr - s.cajsr) / 180.0;

  // Per-ion totals
  c.itca = c.ilca + c.icab + c.ipca - 2.0 * c.inaca + c.icat;
  c.itna = c.ina + c.inab + c.ilcana + c.insna + 3.0 * c.inak + 3.0 * c.inaca;
  c.itk = c.ikr + c.iks + (c.ik1 + c.ikp) + c.ilcak + c.ikns - 2.0 * c.inak + cfg.ito;

  // CICR from the junctional SR, gated by the release clock
  {
    const double grel = 150.0 / (1.0 + std::exp(c.itca + 5.0) / 0.9);
    c.irel = grel * ryr_open(s.tc) * ryr_close(s.tc) * (s.cajsr - s.cai);
  }

  c.itot = c.ikr + c.iks + (c.ik1 + c.ikp) + c.ilcak + c.ikns - 2.0 * c.inak + c.ina + c.inab +
           c.ilcana + c.insna + 3.0 * c.inak + 3.0 * c.inaca + c.ilca + c.icab + c.ipca -
           2.0 * c.inaca + c.icat;

  // Buffered calcium bookkeeping (the dt-scaled increments of the stepping
  // scheme, not plain derivatives).
  c.dcai = -dt * ((c.itca * kAcap) / (kVmyo * 2.0 * kFaraday) +
                  (c.iup - c.ileak) * kVnsr / kVmyo - c.irel * kVjsr / kVmyo);
  c.dcajsr = dt * (c.itr - c.irel);

  return c;
}

void apply_stimulus(CellState& s, const CellConfig& cfg) {
  const double dv = cfg.stim_vm - s.vm;
  s.ki += dv * kAcap / (kVmyo * kFaraday);
  s.vm = cfg.stim_vm;
}

void update_cicr_timer(CellState& s, double dvdt, double dt) {
  s.tc += dt;
  if (s.prev_dvdt > 1.0 && dvdt < s.prev_dvdt && s.t - s.t_last_reset > 10.0) {
    s.tc = 0.0;
    s.t_last_reset = s.t;
  }
  s.prev_dvdt = dvdt;
}

namespace {

// Solve the myoplasmic buffer constraint: total Ca (free + TRPN + CMDN bound)
// equals catotal; the free concentration is the cubic's explicit root.
double buffered_cai(double catotal) {
  const double kmtrpn = 0.0005, kmcmdn = 0.00238;
  const double btrpn = 0.07, bcmdn = 0.05;
  const double bb = bcmdn + btrpn - catotal + kmtrpn + kmcmdn;
  const double cc = kmcmdn * kmtrpn - catotal * (kmtrpn + kmcmdn) + btrpn * kmcmdn + bcmdn * kmtrpn;
  const double dd = -kmtrpn * kmcmdn * catotal;
  const double fab = std::sqrt(bb * bb - 3.0 * cc);
  return (2.0 / 3.0) * fab *
             std::cos(std::acos((9.0 * bb * cc - 2.0 * bb * bb * bb - 27.0 * dd) /
                                (2.0 * std::pow(bb * bb - 3.0 * cc, 1.5))) /
                      3.0) -
         bb / 3.0;
}

// JSR buffer (calsequestrin) constraint, solved by its quadratic root.
double buffered_cajsr(double cajsr, double dcajsr) {
  const double csqn = 10.0 * cajsr / (cajsr + 0.8);
  const double bjsr = 10.0 - csqn - dcajsr - cajsr + 0.8;
  const double cjsr = 0.8 * (csqn + dcajsr + cajsr);
  return (std::sqrt(bjsr * bjsr + 4.0 * cjsr) - bjsr) / 2.0;
}

bool finite_state(const CellState& s) {
  if (!std::isfinite(s.vm) || !std::isfinite(s.nai) || !std::isfinite(s.ki) ||
      !std::isfinite(s.cai) || !std::isfinite(s.cansr) || !std::isfinite(s.cajsr))
    return false;
  for (double u : s.mc)
    if (!std::isfinite(u)) return false;
  return true;
}

}  // namespace

StepOutcome step_cell(CellState& s, const MethodConfig& mc_cfg, const CellConfig& cell_cfg,
                      const SolverTables& tables, long long* ina_ns) {
  using Clock = std::chrono::steady_clock;
  const double dt = mc_cfg.dt;
  const Currents cur = compute_currents(s, cell_cfg, dt);
  const double vm_frozen = s.vm;

  // Markov chain advance at the frozen potential.
  const auto mc_t0 = ina_ns ? Clock::now() : Clock::time_point{};
  switch (mc_cfg.method) {
    case Method::ForwardEuler: {
      const RateSet r = (mc_cfg.tabulated && tables.rates)
                            ? tables.rates->rates[tables.rates->grid.lookup(vm_frozen)]
                            : eval_rates(vm_frozen);
      s.mc = step_fe(s.mc, r, dt);
      break;
    }
    case Method::MatrixRushLarsen:
      s.mc = step_mrl(s.mc, *tables.stepper, vm_frozen);
      break;
    case Method::HybridOperatorSplitting:
      if (mc_cfg.tabulated && tables.hos_coeffs) {
        s.mc = step_hos(s.mc, *tables.hos_coeffs, vm_frozen);
      } else {
        const RateSet r = (mc_cfg.tabulated && tables.rates)
                              ? tables.rates->rates[tables.rates->grid.lookup(vm_frozen)]
                              : eval_rates(vm_frozen);
        s.mc = step_hos(s.mc, r, dt);
      }
      break;
  }
  if (ina_ns) *ina_ns += (Clock::now() - mc_t0).count();
  if (max_abs(s.mc) > 10.0) return StepOutcome::Instability;

  // HH gates at the frozen potential.
  const GateRates g = gate_rates(vm_frozen);
  if (cell_cfg.gates_rush_larsen) {
    s.d = step_gate_rl(s.d, g.dss, g.taud, dt);
    s.f = step_gate_rl(s.f, g.fss, g.tauf, dt);
    s.b = step_gate_rl(s.b, g.bss, g.taub, dt);
    s.g = step_gate_rl(s.g, g.gss, g.taug, dt);
    s.xr = step_gate_rl(s.xr, g.xrss, g.tauxr, dt);
    s.xs1 = step_gate_rl(s.xs1, g.xs1ss, g.tauxs1, dt);
    s.xs2 = step_gate_rl(s.xs2, g.xs2ss, g.tauxs2, dt);
  } else {
    s.d += dt * (g.dss - s.d) / g.taud;
    s.f += dt * (g.fss - s.f) / g.tauf;
    s.b += dt * (g.bss - s.b) / g.taub;
    s.g += dt * (g.gss - s.g) / g.taug;
    s.xr += dt * (g.xrss - s.xr) / g.tauxr;
    s.xs1 += dt * (g.xs1ss - s.xs1) / g.tauxs1;
    s.xs2 += dt * (g.xs2ss - s.xs2) / g.tauxs2;
  }

  // Ion concentrations and the buffered Ca pools.
  s.nai += -dt * cur.itna * kAcap / (kVmyo * kFaraday);
  s.ki += -dt * cur.itk * kAcap / (kVmyo * kFaraday);
  s.cansr += dt * (cur.iup - cur.ileak - cur.itr * kVjsr / kVnsr);
  {
    const double trpn = 0.07 * s.cai / (s.cai + 0.0005);
    const double cmdn = 0.05 * s.cai / (s.cai + 0.00238);
    s.cai = buffered_cai(trpn + cmdn + cur.dcai + s.cai);
  }
  s.cajsr = buffered_cajsr(s.cajsr, cur.dcajsr);

  // Membrane potential and the CICR clock.
  const double dvdt = -cur.itot;
  s.vm += dt * dvdt;
  s.t += dt;
  update_cicr_timer(s, dvdt, dt);

  if (!finite_state(s)) return StepOutcome::Instability;
  if (cell_cfg.vm_band_guard && (s.vm < -150.0 || s.vm > 100.0)) return StepOutcome::Instability;
  if (s.nai <= 0.0 || s.ki <= 0.0 || s.cai <= 0.0 || s.cansr <= 0.0 || s.cajsr <= 0.0)
    return StepOutcome::Unphysical;
  return StepOutcome::Ok;
}

namespace {

double ina_of(const CellState& s, const CellConfig& cfg) {
  return cfg.gna * (s.vm - kRTF * std::log(kNao / s.nai)) * s.mc[O];
}

TraceSample make_sample(const CellState& s, const CellConfig& cfg) {
  TraceSample r;
  r.t = s.t;
  r.vm = s.vm;
  r.ina = ina_of(s, cfg);
  r.mc = s.mc;
  r.cons_err = sum(s.mc) - 1.0;
  r.nai = s.nai;
  r.ki = s.ki;
  r.cai = s.cai;
  r.cansr = s.cansr;
  r.cajsr = s.cajsr;
  return r;
}

}  // namespace

Trace simulate(const Protocol& protocol, const CellConfig& cfg, const SolverTables& tables) {
  if (!(protocol.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  if (protocol.pulses < 0) throw std::invalid_argument("simulate: pulses must be >= 0");
  const double duration = protocol.duration > 0.0
                              ? protocol.duration
                              : (protocol.pulses > 0 ? protocol.pulses * protocol.cycle_length
                                                     : protocol.cycle_length);

  MethodConfig mc_cfg{protocol.method, protocol.dt, protocol.tabulated};
  if (mc_cfg.method == Method::MatrixRushLarsen) {
    if (!tables.stepper) throw std::invalid_argument("simulate: MRL requires a stepper table");
    if (tables.stepper->dt != protocol.dt)
      throw std::invalid_argument("simulate: stepper table was built for a different dt");
  }
  if (mc_cfg.method == Method::HybridOperatorSplitting && mc_cfg.tabulated && tables.hos_coeffs &&
      tables.hos_coeffs->dt != protocol.dt)
    throw std::invalid_argument("simulate: HOS coefficient table was built for a different dt");

  const VoltageGrid* lookup_grid = nullptr;
  if (mc_cfg.method == Method::MatrixRushLarsen) lookup_grid = &tables.stepper->grid;
  else if (mc_cfg.tabulated && tables.hos_coeffs && mc_cfg.method == Method::HybridOperatorSplitting)
    lookup_grid = &tables.hos_coeffs->grid;
  else if (mc_cfg.tabulated && tables.rates)
    lookup_grid = &tables.rates->grid;

  CellState s = init_state();
  Trace trace;
  const bool record = protocol.record_stride > 0;
  if (record) trace.samples.push_back(make_sample(s, cfg));

  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();
  long long ina_ns = 0;

  int next_pulse = 0;
  long long n = 0;
  while (s.t < duration - 1e-9) {
    if (next_pulse < protocol.pulses &&
        s.t >= next_pulse * protocol.cycle_length + 1.0 - 1e-9) {
      apply_stimulus(s, cfg);
      ++next_pulse;
    }
    if (lookup_grid && (s.vm < lookup_grid->vmin || s.vm > lookup_grid->vmax))
      ++trace.clamped_lookups;

    const StepOutcome outcome = step_cell(s, mc_cfg, cfg, tables, &ina_ns);
    ++n;

    trace.max_cons_err = std::max(trace.max_cons_err, std::fabs(sum(s.mc) - 1.0));
    for (double u : s.mc) trace.min_occupancy = std::min(trace.min_occupancy, u);

    if (outcome != StepOutcome::Ok) {
      trace.status = outcome == StepOutcome::Instability ? RunStatus::Instability
                                                         : RunStatus::Unphysical;
      if (record) trace.samples.push_back(make_sample(s, cfg));
      break;
    }
    if (record && n % protocol.record_stride == 0) trace.samples.push_back(make_sample(s, cfg));
  }

  trace.steps = n;
  trace.end_time = s.t;
  trace.total_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
  trace.ina_seconds = double(ina_ns) * 1e-9;
  return trace;
}

const char* const kTraceCsvHeader =
    "t_ms,Vm_mV,INa,O,P,Q,R,S,T,U,V,W,cons_err,Nai,Ki,Cai,CaNSR,CaJSR";

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fputs(kTraceCsvHeader, f);
  std::fputc('\n', f);
  for (const TraceSample& s : trace.samples) {
    std::fprintf(f,
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 s.t, s.vm, s.ina, s.mc[O], s.mc[P], s.mc[Q], s.mc[R], s.mc[S], s.mc[T], s.mc[U],
                 s.mc[V], s.mc[W], s.cons_err, s.nai, s.ki, s.cai, s.cansr, s.cajsr);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("write failed for " + path);
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty trace file");
  if (line != kTraceCsvHeader) throw std::runtime_error(path + ": unexpected trace header");
  Trace t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceSample s{};
    double* fields[18] = {&s.t,     &s.vm,    &s.ina,   &s.mc[O], &s.mc[P], &s.mc[Q],
                          &s.mc[R], &s.mc[S], &s.mc[T], &s.mc[U], &s.mc[V], &s.mc[W],
                          &s.cons_err, &s.nai, &s.ki,   &s.cai,   &s.cansr, &s.cajsr};
    std::stringstream row(line);
    std::string cell;
    for (int i = 0; i < 18; ++i) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": short trace row");
      *fields[i] = std::strtod(cell.c_str(), nullptr);
    }
    t.samples.push_back(s);
  }
  if (!t.samples.empty()) t.end_time = t.samples.back().t;
  return t;
}

}  // namespace mcina
