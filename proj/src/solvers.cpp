#include "mcina/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace mcina {

StateOccupancy step_fe(const StateOccupancy& u, const Mat9& a, double dt) {
  StateOccupancy out;
  for (int i = 0; i < kStates; ++i) {
    double s = 0.0;
    for (int j = 0; j < kStates; ++j) s += a(i, j) * u[j];
    out[i] = u[i] + dt * s;
  }
  return out;
}

StateOccupancy step_fe(const StateOccupancy& u, const RateSet& r, double dt) {
  StateOccupancy n;
  n[O] = u[O] + dt * (r.a13 * u[P] + r.b2 * u[U] - (r.b13 + r.a2) * u[O]);
  n[P] = u[P] + dt * (r.a12 * u[Q] + r.a3 * u[U] + r.b13 * u[O] - (r.b12 + r.b3 + r.a13) * u[P]);
  n[Q] = u[Q] + dt * (r.a11 * u[R] + r.a3 * u[T] + r.b12 * u[P] - (r.b11 + r.b3 + r.a12) * u[Q]);
  n[R] = u[R] + dt * (r.a3 * u[S] + r.b11 * u[Q] - (r.b3 + r.a11) * u[R]);
  n[S] = u[S] + dt * (r.b11 * u[T] + r.b3 * u[R] - (r.a11 + r.a3) * u[S]);
  n[T] = u[T] + dt * (r.b3 * u[Q] + r.a11 * u[S] + r.b12 * u[U] - (r.a3 + r.b11 + r.a12) * u[T]);
  n[U] = u[U] + dt * (r.a12 * u[T] + r.b3 * u[P] + r.b4 * u[V] + r.a2 * u[O] -
                      (r.b12 + r.a3 + r.b2 + r.a4) * u[U]);
  n[V] = u[V] + dt * (r.a4 * u[U] + r.b5 * u[W] - (r.b4 + r.a5) * u[V]);
  n[W] = u[W] + dt * (r.a5 * u[V] - r.b5 * u[W]);
  return n;
}

StateOccupancy step_mrl(const StateOccupancy& u, const StepperTable& stepper, double vm) {
  return stepper.transition[stepper.grid.lookup(vm)] * u;
}

namespace {

void require_distinct(double d, const char* what) {
  if (std::fabs(d) < kDegenerateRateEps)
    throw DegenerateRates(std::string("rate collision in ") + what);
}

}  // namespace

FastHighCoeffs fast_high_coeffs(const RateSet& r, double dt) {
  // Rates along the fast-at-high-potential chains, by their chain role:
  const double a_ou = r.a2, a_po = r.a13, a_qp = r.a12, a_rq = r.a11;
  const double a_st = r.a11, a_tu = r.a12;

  const double d_ou_po = a_ou - a_po;
  const double d_po_qp = a_po - a_qp;
  const double d_ou_qp = a_ou - a_qp;
  const double d_qp_rq = a_qp - a_rq;
  const double d_po_rq = a_po - a_rq;
  const double d_ou_rq = a_ou - a_rq;
  const double d_tu_st = a_tu - a_st;
  require_distinct(d_ou_po, "fast-high substep (O->U vs P->O)");
  require_distinct(d_po_qp, "fast-high substep (P->O vs Q->P)");
  require_distinct(d_ou_qp, "fast-high substep (O->U vs Q->P)");
  require_distinct(d_qp_rq, "fast-high substep (Q->P vs R->Q)");
  require_distinct(d_po_rq, "fast-high substep (P->O vs R->Q)");
  require_distinct(d_ou_rq, "fast-high substep (O->U vs R->Q)");
  require_distinct(d_tu_st, "fast-high substep (T->U vs S->T)");

  FastHighCoeffs c;
  c.m_ou = std::exp(-a_ou * dt);
  c.m_po = std::exp(-a_po * dt);
  c.m_qp = std::exp(-a_qp * dt);
  c.m_rq = std::exp(-a_rq * dt);
  c.m_st = c.m_rq;  // same rate definition
  c.m_tu = c.m_qp;

  c.k_po = a_po * (c.m_po - c.m_ou) / d_ou_po;
  c.k_qo = a_po * a_qp * (c.m_qp - c.m_ou) / (d_po_qp * d_ou_qp) -
           a_po * a_qp * (c.m_po - c.m_ou) / (d_po_qp * d_ou_po);
  c.k_ro = -a_po * a_qp * a_rq * (c.m_qp - c.m_ou) / (d_qp_rq * d_po_qp * d_ou_qp) +
           a_po * a_qp * a_rq * (c.m_po - c.m_ou) / (d_qp_rq * d_po_qp * d_ou_po) +
           a_po * a_qp * a_rq * (c.m_rq - c.m_ou) / (d_qp_rq * d_po_rq * d_ou_rq) -
           a_po * a_qp * a_rq * (c.m_po - c.m_ou) / (d_qp_rq * d_po_rq * d_ou_po);
  c.k_qp = a_qp * (c.m_qp - c.m_po) / d_po_qp;
  c.k_rp = -a_qp * a_rq * (c.m_qp - c.m_po) / (d_qp_rq * d_po_qp) +
           a_qp * a_rq * (c.m_rq - c.m_po) / (d_qp_rq * d_po_rq);
  c.k_rq = -a_rq * (c.m_qp - c.m_rq) / d_qp_rq;
  c.k_st = -a_st * (c.m_tu - c.m_st) / d_tu_st;
  c.k_su = 1.0 + (a_st * c.m_tu - a_tu * c.m_st) / d_tu_st;
  c.k_pu = 1.0 - (a_ou * c.m_po - a_po * c.m_ou) / d_ou_po;
  c.k_qu = (a_po / d_po_qp) * (1.0 - (a_ou * c.m_qp - a_qp * c.m_ou) / d_ou_qp) -
           (a_qp / d_po_qp) * (1.0 - (a_ou * c.m_po - a_po * c.m_ou) / d_ou_po);
  c.k_ru = -(a_po * a_rq / (d_qp_rq * d_po_qp)) * (1.0 - (a_ou * c.m_qp - a_qp * c.m_ou) / d_ou_qp) +
           (a_qp * a_rq / (d_qp_rq * d_po_qp)) * (1.0 - (a_ou * c.m_po - a_po * c.m_ou) / d_ou_po) +
           (a_po * a_qp / (d_qp_rq * d_po_rq)) * (1.0 - (a_ou * c.m_rq - a_rq * c.m_ou) / d_ou_rq) -
           (a_qp * a_rq / (d_qp_rq * d_po_rq)) * (1.0 - (a_ou * c.m_po - a_po * c.m_ou) / d_ou_po);
  return c;
}

FastLowCoeffs fast_low_coeffs(const RateSet& r, double dt) {
  const double a_op = r.b13, a_pq = r.b12, a_qr = r.b11;
  const double a_ts = r.b11, a_ut = r.b12;

  const double d_pq_op = a_pq - a_op;
  const double d_qr_op = a_qr - a_op;
  const double d_qr_pq = a_qr - a_pq;
  const double d_ts_ut = a_ts - a_ut;
  require_distinct(d_pq_op, "fast-low substep (P->Q vs O->P)");
  require_distinct(d_qr_op, "fast-low substep (Q->R vs O->P)");
  require_distinct(d_qr_pq, "fast-low substep (Q->R vs P->Q)");
  require_distinct(d_ts_ut, "fast-low substep (T->S vs U->T)");

  FastLowCoeffs c;
  c.m_op = std::exp(-a_op * dt);
  c.m_pq = std::exp(-a_pq * dt);
  c.m_qr = std::exp(-a_qr * dt);
  c.m_ts = c.m_qr;
  c.m_ut = c.m_pq;

  c.l_op = a_op * (c.m_op - c.m_pq) / d_pq_op;
  c.l_oq = a_pq * a_op * (c.m_op - c.m_qr) / (d_pq_op * d_qr_op) -
           a_pq * a_op * (c.m_pq - c.m_qr) / (d_pq_op * d_qr_pq);
  c.l_pq = a_pq * (c.m_pq - c.m_qr) / d_qr_pq;
  c.l_or = 1.0 + a_pq * (a_op * c.m_qr - a_qr * c.m_op) / (d_pq_op * d_qr_op) -
           a_op * (a_pq * c.m_qr - a_qr * c.m_pq) / (d_pq_op * d_qr_pq);
  c.l_pr = 1.0 + (a_pq * c.m_qr - a_qr * c.m_pq) / d_qr_pq;
  c.l_us = 1.0 + (a_ut * c.m_ts - a_ts * c.m_ut) / d_ts_ut;
  c.l_ut = a_ut * (c.m_ut - c.m_ts) / d_ts_ut;
  return c;
}

StateOccupancy apply_fast_high(const StateOccupancy& u, const FastHighCoeffs& c) {
  StateOccupancy n;
  n[O] = c.m_ou * u[O] + c.k_po * u[P] + c.k_qo * u[Q] + c.k_ro * u[R];
  n[P] = c.m_po * u[P] + c.k_qp * u[Q] + c.k_rp * u[R];
  n[Q] = c.m_qp * u[Q] + c.k_rq * u[R];
  n[R] = c.m_rq * u[R];
  n[S] = c.m_st * u[S];
  n[T] = c.m_tu * u[T] + c.k_st * u[S];
  n[U] = u[U] + (1.0 - c.m_tu) * u[T] + c.k_su * u[S] + (1.0 - c.m_ou) * u[O] + c.k_pu * u[P] +
         c.k_qu * u[Q] + c.k_ru * u[R];
  n[V] = u[V];
  n[W] = u[W];
  return n;
}

StateOccupancy apply_fast_low(const StateOccupancy& u, const FastLowCoeffs& c) {
  StateOccupancy n;
  n[O] = c.m_op * u[O];
  n[P] = c.l_op * u[O] + c.m_pq * u[P];
  n[Q] = c.l_oq * u[O] + c.l_pq * u[P] + c.m_qr * u[Q];
  n[R] = c.l_or * u[O] + c.l_pr * u[P] + (1.0 - c.m_qr) * u[Q] + u[R];
  n[S] = c.l_us * u[U] + (1.0 - c.m_ts) * u[T] + u[S];
  n[T] = c.l_ut * u[U] + c.m_ts * u[T];
  n[U] = c.m_ut * u[U];
  n[V] = u[V];
  n[W] = u[W];
  return n;
}

StateOccupancy hos_fast_high(const StateOccupancy& u, const RateSet& r, double dt) {
  return apply_fast_high(u, fast_high_coeffs(r, dt));
}

StateOccupancy hos_fast_low(const StateOccupancy& u, const RateSet& r, double dt) {
  return apply_fast_low(u, fast_low_coeffs(r, dt));
}

StateOccupancy hos_slow(const StateOccupancy& u, const RateSet& r, double dt) {
  StateOccupancy n;
  n[O] = u[O] + dt * (r.b2 * u[U]);
  n[P] = u[P] + dt * (r.a3 * u[U] - r.b3 * u[P]);
  n[Q] = u[Q] + dt * (r.a3 * u[T] - r.b3 * u[Q]);
  n[R] = u[R] + dt * (r.a3 * u[S] - r.b3 * u[R]);
  n[S] = u[S] + dt * (r.b3 * u[R] - r.a3 * u[S]);
  n[T] = u[T] + dt * (r.b3 * u[Q] - r.a3 * u[T]);
  n[U] = u[U] + dt * (r.b3 * u[P] + r.b4 * u[V] - (r.a3 + r.b2 + r.a4) * u[U]);
  n[V] = u[V] + dt * (r.a4 * u[U] + r.b5 * u[W] - (r.b4 + r.a5) * u[V]);
  n[W] = u[W] + dt * (r.a5 * u[V] - r.b5 * u[W]);
  return n;
}

namespace {

Mat9 split_exponential_fallback(const Mat9& part, double dt) {
  try {
    return exp_via_eig(decompose(part), dt);
  } catch (const EigenError&) {
    // A collided pair makes the split matrix defective; the reference
    // exponential does not care.
    return exp_reference(part, dt);
  }
}

}  // namespace

StateOccupancy step_hos(const StateOccupancy& u, const RateSet& r, double dt) {
  StateOccupancy x;
  try {
    x = hos_fast_high(u, r, dt);
  } catch (const DegenerateRates&) {
    x = split_exponential_fallback(assemble_split(r).fast_high, dt) * u;
  }
  try {
    x = hos_fast_low(x, r, dt);
  } catch (const DegenerateRates&) {
    x = split_exponential_fallback(assemble_split(r).fast_low, dt) * x;
  }
  return hos_slow(x, r, dt);
}

double step_gate_rl(double y, double yss, double tau, double dt) {
  return yss - (yss - y) * std::exp(-dt / tau);
}

HosCoeffTable build_hos_coeff_table(const VoltageGrid& grid, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_hos_coeff_table: dt must be positive");
  HosCoeffTable t;
  t.grid = grid;
  t.dt = dt;
  t.high.resize(grid.count);
  t.low.resize(grid.count);
  t.rates.resize(grid.count);
  t.degenerate.assign(grid.count, false);
  for (std::uint32_t j = 0; j < grid.count; ++j) {
    const RateSet r = eval_rates(grid.voltage(j));
    t.rates[j] = r;
    try {
      t.high[j] = fast_high_coeffs(r, dt);
      t.low[j] = fast_low_coeffs(r, dt);
    } catch (const DegenerateRates&) {
      t.degenerate[j] = true;
      const SplitGenerators g = assemble_split(r);
      HosCoeffTable::DenseFallback fb;
      fb.index = j;
      fb.fast_high = split_exponential_fallback(g.fast_high, dt);
      fb.fast_low = split_exponential_fallback(g.fast_low, dt);
      t.fallbacks.push_back(fb);
    }
  }
  return t;
}

StateOccupancy step_hos(const StateOccupancy& u, const HosCoeffTable& table, double vm) {
  const std::uint32_t j = table.grid.lookup(vm);
  if (table.degenerate[j]) {
    const auto it = std::lower_bound(
        table.fallbacks.begin(), table.fallbacks.end(), j,
        [](const HosCoeffTable::DenseFallback& f, std::uint32_t idx) { return f.index < idx; });
    const StateOccupancy x = it->fast_low * (it->fast_high * u);
    return hos_slow(x, table.rates[j], table.dt);
  }
  const StateOccupancy x = apply_fast_low(apply_fast_high(u, table.high[j]), table.low[j]);
  return hos_slow(x, table.rates[j], table.dt);
}

}  // namespace mcina
