// Command-line front end: voltage-table generation, single-cell simulation,
// trace comparison, error-coefficient analysis, and method benchmarks.
// All data products are CSV (traces, reports) or the binary table format.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcina/cell_model.hpp"
#include "mcina/error_analysis.hpp"

namespace {

// Exit codes: 0 ok, 2 usage, 3 I/O or format, 4 instability, 5 unphysical.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitUnstable = 4;
constexpr int kExitUnphysical = 5;

const char* kTableEnvVar = "MCINA_TABLE";

std::string default_table_path() {
  const char* env = std::getenv(kTableEnvVar);
  return env ? env : "";
}

mcina::Method parse_method(const std::string& name) {
  if (name == "fe") return mcina::Method::ForwardEuler;
  if (name == "mrl") return mcina::Method::MatrixRushLarsen;
  if (name == "hos") return mcina::Method::HybridOperatorSplitting;
  throw CLI::ValidationError("--method", "expected one of fe, mrl, hos");
}

struct SimArgs {
  std::string method = "fe";
  double dt_us = 10.0;
  int pulses = 1;
  double cl = 1000.0;
  double duration = -1.0;
  std::string table = default_table_path();
  std::string out;
  int stride = 10;
  bool tabulated = false;
  double gna = mcina::CellConfig{}.gna;
  bool fe_gates = false;
  bool no_vm_guard = false;
};

int run_simulate(const SimArgs& a) {
  using namespace mcina;
  const Method method = parse_method(a.method);
  const double dt = a.dt_us * 1e-3;

  EigenTable eigen_table;
  StepperTable stepper;
  RateTable rates;
  HosCoeffTable hos_coeffs;
  SolverTables tables;

  const bool needs_table = method == Method::MatrixRushLarsen;
  if (needs_table && a.table.empty()) {
    std::fprintf(stderr, "mcina simulate: --table (or %s) is required for mrl\n", kTableEnvVar);
    return kExitUsage;
  }
  if (needs_table) {
    eigen_table = load_table(a.table);
    stepper = build_stepper(eigen_table, dt);
    tables.stepper = &stepper;
    if (stepper.max_imag_residue > 1e-12)
      std::fprintf(stderr, "note: worst imaginary residue in the stepper table: %.3e\n",
                   stepper.max_imag_residue);
  }
  if (a.tabulated && method != Method::MatrixRushLarsen) {
    const VoltageGrid grid =
        needs_table ? eigen_table.grid : VoltageGrid::from_range(-100.0, 70.0, 0.01);
    if (method == Method::HybridOperatorSplitting) {
      hos_coeffs = build_hos_coeff_table(grid, dt);
      tables.hos_coeffs = &hos_coeffs;
    } else {
      rates = build_rate_table(grid);
      tables.rates = &rates;
    }
  }

  CellConfig cfg;
  cfg.gna = a.gna;
  cfg.gates_rush_larsen = !a.fe_gates;
  cfg.vm_band_guard = !a.no_vm_guard;

  Protocol p;
  p.method = method;
  p.tabulated = a.tabulated;
  p.dt = dt;
  p.pulses = a.pulses;
  p.cycle_length = a.cl;
  p.duration = a.duration;
  p.record_stride = a.out.empty() ? 0 : std::max(1, a.stride);

  const Trace trace = simulate(p, cfg, tables);
  if (!a.out.empty()) write_trace_csv(trace, a.out);

  const char* status = trace.status == RunStatus::Completed ? "stable"
                       : trace.status == RunStatus::Instability ? "unstable"
                                                                : "unphysical";
  std::printf("status=%s steps=%lld end_t_ms=%.6g max|sum(u)-1|=%.3e min_occupancy=%.3e\n", status,
              trace.steps, trace.end_time, trace.max_cons_err, trace.min_occupancy);
  std::printf("time_ina_s=%.3f time_total_s=%.3f clamped_lookups=%lld\n", trace.ina_seconds,
              trace.total_seconds, trace.clamped_lookups);
  if (trace.status == RunStatus::Instability) return kExitUnstable;
  if (trace.status == RunStatus::Unphysical) return kExitUnphysical;
  return kExitOk;
}

int run_gentable(double dv, double vmin, double vmax, const std::string& out, unsigned threads) {
  using namespace mcina;
  const auto t0 = std::chrono::steady_clock::now();
  const VoltageGrid grid = VoltageGrid::from_range(vmin, vmax, dv);
  const EigenTable table = build_eigen_table(grid, threads);
  double worst = 0.0;
  for (std::uint32_t j = 0; j < grid.count; ++j) {
    const Mat9 a = assemble_full(eval_rates(grid.voltage(j)));
    worst = std::max(worst,
                     reconstruction_residual(a, table.entries[j]) / std::max(1.0, frobenius_norm(a)));
  }
  save_table(table, out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("entries=%u worst_rel_residual=%.3e wall_s=%.2f file=%s\n", grid.count, worst, secs,
              out.c_str());
  return kExitOk;
}

int run_compare(const std::string& ref_path, const std::string& test_path) {
  using namespace mcina;
  const Trace ref = read_trace_csv(ref_path);
  const Trace test = read_trace_csv(test_path);
  if (ref.samples.empty() || test.samples.empty())
    throw std::runtime_error("compare: empty trace");

  const double lo = std::max(ref.samples.front().t, test.samples.front().t);
  const double hi = std::min(ref.samples.back().t, test.samples.back().t);
  if (lo > hi) throw std::runtime_error("compare: traces cover disjoint time ranges");

  // Nearest-time alignment of the test samples onto the reference.
  const char* names[17] = {"Vm_mV", "INa", "O", "P", "Q", "R", "S",  "T", "U",
                           "V",     "W",   "cons_err", "Nai", "Ki", "Cai", "CaNSR", "CaJSR"};
  auto field = [](const TraceSample& s, int k) -> double {
    switch (k) {
      case 0: return s.vm;
      case 1: return s.ina;
      case 11: return s.cons_err;
      case 12: return s.nai;
      case 13: return s.ki;
      case 14: return s.cai;
      case 15: return s.cansr;
      case 16: return s.cajsr;
      default: return s.mc[k - 2];
    }
  };
  double maxdev[17] = {};
  double sumsq[17] = {};
  long long count = 0;
  size_t j = 0;
  for (const TraceSample& s : test.samples) {
    if (s.t < lo || s.t > hi) continue;
    while (j + 1 < ref.samples.size() &&
           std::fabs(ref.samples[j + 1].t - s.t) <= std::fabs(ref.samples[j].t - s.t))
      ++j;
    ++count;
    for (int k = 0; k < 17; ++k) {
      const double d = std::fabs(field(s, k) - field(ref.samples[j], k));
      maxdev[k] = std::max(maxdev[k], d);
      sumsq[k] += d * d;
    }
  }
  if (count == 0) throw std::runtime_error("compare: no overlapping samples");
  std::printf("column,max_dev,rms_dev\n");
  for (int k = 0; k < 17; ++k)
    std::printf("%s,%.17g,%.17g\n", names[k], maxdev[k], std::sqrt(sumsq[k] / double(count)));
  return kExitOk;
}

int run_errors(const std::string& trace_path, const std::string& out, double t_from, double t_to) {
  using namespace mcina;
  const Trace trace = read_trace_csv(trace_path);
  if (trace.samples.empty()) throw std::runtime_error("errors: empty trace");
  const ErrorTraceResult res = error_trace(trace, t_from, t_to);

  if (!out.empty()) {
    std::FILE* f = std::fopen(out.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    std::fputs("t_ms,Vm,dVdt,errFE,errMRL,errHOS,errOS\n", f);
    for (const ErrorSample& s : res.samples)
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.vm, s.dvdt, s.err.fe,
                   s.err.mrl, s.err.hos, s.err.os);
    if (std::fclose(f) != 0) throw std::runtime_error("write failed for " + out);
  }
  std::printf("max errFE=%.6g errMRL=%.6g errHOS=%.6g errOS=%.6g [ms^-2]\n", res.maxima.fe,
              res.maxima.mrl, res.maxima.hos, res.maxima.os);
  std::printf("min errFE/errMRL=%.6g  min errFE/errHOS=%.6g\n", res.min_fe_over_mrl,
              res.min_fe_over_hos);
  return kExitOk;
}

struct BenchVariant {
  std::string name;
  mcina::Method method;
  bool tabulated;
  bool hos_coeff_table;  // full coefficient tabulation vs plain rate lookup
};

int run_bench(const std::string& methods_csv, const std::string& dts_csv, int pulses, double cl,
              const std::string& table_path, int reps) {
  using namespace mcina;

  std::vector<BenchVariant> variants;
  {
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "fe") variants.push_back({tok, Method::ForwardEuler, false, false});
      else if (tok == "fe-tab") variants.push_back({tok, Method::ForwardEuler, true, false});
      else if (tok == "mrl-tab") variants.push_back({tok, Method::MatrixRushLarsen, true, false});
      else if (tok == "hos") variants.push_back({tok, Method::HybridOperatorSplitting, false, false});
      else if (tok == "hos-rates-tab")
        variants.push_back({tok, Method::HybridOperatorSplitting, true, false});
      else if (tok == "hos-tab")
        variants.push_back({tok, Method::HybridOperatorSplitting, true, true});
      else throw CLI::ValidationError("--methods", "unknown method variant: " + tok);
    }
  }
  std::vector<double> dts_us;
  {
    std::stringstream ss(dts_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) dts_us.push_back(std::stod(tok));
  }
  if (variants.empty() || dts_us.empty())
    throw CLI::ValidationError("bench", "need at least one method and one dt");

  const bool needs_eigen =
      std::any_of(variants.begin(), variants.end(),
                  [](const BenchVariant& v) { return v.method == Method::MatrixRushLarsen; });
  EigenTable eigen_table;
  if (needs_eigen) {
    if (table_path.empty()) {
      std::fprintf(stderr, "mcina bench: --table (or %s) required for mrl-tab\n", kTableEnvVar);
      return kExitUsage;
    }
    eigen_table = load_table(table_path);
  }
  const VoltageGrid grid =
      needs_eigen ? eigen_table.grid : VoltageGrid::from_range(-100.0, 70.0, 0.01);

  CellConfig cfg;
  std::printf("method,dt_us,ina_s,total_s\n");
  for (const BenchVariant& v : variants) {
    for (double dt_us : dts_us) {
      const double dt = dt_us * 1e-3;
      StepperTable stepper;
      RateTable rates;
      HosCoeffTable hos_coeffs;
      SolverTables tables;
      if (v.method == Method::MatrixRushLarsen) {
        stepper = build_stepper(eigen_table, dt);
        tables.stepper = &stepper;
      }
      if (v.tabulated) {
        if (v.hos_coeff_table) {
          hos_coeffs = build_hos_coeff_table(grid, dt);
          tables.hos_coeffs = &hos_coeffs;
        } else {
          rates = build_rate_table(grid);
          tables.rates = &rates;
        }
      }
      Protocol p;
      p.method = v.method;
      p.tabulated = v.tabulated;
      p.dt = dt;
      p.pulses = pulses;
      p.cycle_length = cl;
      p.record_stride = 0;
      // a method that cannot hold this timestep gets an empty cell, like the
      // missing entries of a stability-limited timing table
      std::vector<double> ina_times, total_times;
      bool unstable = false;
      for (int r = 0; r < reps && !unstable; ++r) {
        const Trace t = simulate(p, cfg, tables);
        if (t.status != RunStatus::Completed) unstable = true;
        ina_times.push_back(t.ina_seconds);
        total_times.push_back(t.total_seconds);
      }
      if (unstable) {
        std::printf("%s,%g,unstable,unstable\n", v.name.c_str(), dt_us);
      } else {
        std::sort(ina_times.begin(), ina_times.end());
        std::sort(total_times.begin(), total_times.end());
        std::printf("%s,%g,%.4f,%.4f\n", v.name.c_str(), dt_us,
                    ina_times[ina_times.size() / 2], total_times[total_times.size() / 2]);
      }
      std::fflush(stdout);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-chain INa timestepper toolkit (FE / matrix Rush-Larsen / hybrid splitting)"};
  app.require_subcommand(1);

  // gentable
  auto* gen = app.add_subcommand("gentable", "build and save an eigendecomposition table");
  double g_dv = 0.01, g_vmin = -100.0, g_vmax = 70.0;
  unsigned g_threads = 0;
  std::string g_out;
  gen->add_option("--dv", g_dv, "voltage grid step, mV");
  gen->add_option("--vmin", g_vmin, "grid start, mV");
  gen->add_option("--vmax", g_vmax, "grid end, mV");
  gen->add_option("--threads", g_threads, "build threads (0 = hardware)");
  gen->add_option("--out", g_out, "output table file")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the paced single-cell protocol");
  SimArgs sa;
  sim->add_option("--method", sa.method, "fe | mrl | hos")->required();
  sim->add_option("--dt", sa.dt_us, "timestep, microseconds")->required();
  sim->add_option("--pulses", sa.pulses, "number of stimuli");
  sim->add_option("--cl", sa.cl, "cycle length, ms");
  sim->add_option("--duration", sa.duration, "total time, ms (default pulses*cl)");
  sim->add_option("--table", sa.table, "eigendecomposition table file (mrl)");
  sim->add_option("--out", sa.out, "trace CSV output");
  sim->add_option("--stride", sa.stride, "record every n-th step");
  sim->add_flag("--tabulated", sa.tabulated, "look rates/coefficients up in voltage tables");
  sim->add_option("--gna", sa.gna, "maximal INa conductance, mS/uF");
  sim->add_flag("--fe-gates", sa.fe_gates, "advance HH gates by forward Euler instead of RL");
  sim->add_flag("--no-vm-guard", sa.no_vm_guard, "do not flag |Vm| excursions as instability");

  // compare
  auto* cmp = app.add_subcommand("compare", "per-column deviations between two traces");
  std::string c_ref, c_test;
  cmp->add_option("--ref", c_ref, "reference trace CSV")->required();
  cmp->add_option("--test", c_test, "trace CSV to compare")->required();

  // errors
  auto* err = app.add_subcommand("errors", "a priori error coefficients along a trace");
  std::string e_trace, e_out;
  double e_from = -1e300, e_to = 1e300;
  err->add_option("--trace", e_trace, "input trace CSV")->required();
  err->add_option("--out", e_out, "output CSV");
  err->add_option("--from", e_from, "evaluate from t, ms");
  err->add_option("--to", e_to, "evaluate to t, ms");

  // bench
  auto* ben = app.add_subcommand("bench", "median wall times per method and dt");
  std::string b_methods = "fe,fe-tab,mrl-tab,hos,hos-tab";
  std::string b_dts = "10,40,100";
  int b_pulses = 10, b_reps = 6;
  double b_cl = 1000.0;
  std::string b_table = default_table_path();
  ben->add_option("--methods", b_methods, "comma list: fe,fe-tab,mrl-tab,hos,hos-rates-tab,hos-tab");
  ben->add_option("--dt-list", b_dts, "comma list of timesteps, microseconds");
  ben->add_option("--pulses", b_pulses, "pulses per run");
  ben->add_option("--cl", b_cl, "cycle length, ms");
  ben->add_option("--table", b_table, "eigendecomposition table file");
  ben->add_option("--reps", b_reps, "repetitions per cell (median reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gentable(g_dv, g_vmin, g_vmax, g_out, g_threads);
    if (sim->parsed()) return run_simulate(sa);
    if (cmp->parsed()) return run_compare(c_ref, c_test);
    if (err->parsed()) return run_errors(e_trace, e_out, e_from, e_to);
    if (ben->parsed()) return run_bench(b_methods, b_dts, b_pulses, b_cl, b_table, b_reps);
  } catch (const mcina::TableIoError& e) {
    std::fprintf(stderr, "mcina: %s\n", e.what());
    return kExitIo;
  } catch (const mcina::TableFormatError& e) {
    std::fprintf(stderr, "mcina: %s\n", e.what());
    return kExitIo;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "mcina: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mcina: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
