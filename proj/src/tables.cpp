#include "mcina/tables.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace mcina {

VoltageGrid VoltageGrid::from_range(double vmin, double vmax, double dv) {
  if (!(dv > 0.0) || !std::isfinite(vmin) || !std::isfinite(vmax) || vmax < vmin)
    throw std::invalid_argument("VoltageGrid: need finite vmin <= vmax and dv > 0");
  const double q = (vmax - vmin) / dv;
  // Nudge by a few ulps so ranges that are exact multiples of dv in real
  // arithmetic do not lose their last point to rounding.
  const double guard = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, q);
  VoltageGrid g;
  g.vmin = vmin;
  g.dv = dv;
  g.count = static_cast<std::uint32_t>(std::floor(q + guard)) + 1;
  g.vmax = g.voltage(g.count - 1);
  return g;
}

std::uint32_t VoltageGrid::lookup(double vm) const {
  if (!std::isfinite(vm)) throw std::invalid_argument("lookup: non-finite membrane potential");
  const double q = (vm - vmin) / dv;
  if (q <= 0.0) return 0;
  // round half away from zero, with an ulp-level nudge so that exact
  // midpoints survive the division rounding deterministically
  const double guard = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, q);
  const double j = std::floor(q + 0.5 + guard);
  if (j >= double(count - 1)) return count - 1;
  return static_cast<std::uint32_t>(j);
}

EigenTable build_eigen_table(const VoltageGrid& grid, unsigned threads) {
  EigenTable table;
  table.grid = grid;
  table.entries.resize(grid.count);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, grid.count);

  std::vector<std::string> failures(threads);
  auto worker = [&](unsigned w) {
    for (std::uint32_t j = w; j < grid.count; j += threads) {
      const double vm = grid.voltage(j);
      try {
        table.entries[j] = decompose(assemble_full(eval_rates(vm)));
      } catch (const std::exception& ex) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "table entry at %.6f mV: %s", vm, ex.what());
        if (failures[w].empty()) failures[w] = buf;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  for (const auto& f : failures)
    if (!f.empty()) throw TableBuildError(f);
  return table;
}

namespace {

constexpr char kMagic[4] = {'M', 'C', 'X', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const unsigned char* p;
  const unsigned char* end;

  void need(size_t n) const {
    if (size_t(end - p) < n) throw TableFormatError("table file truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
    p += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

void put_complex(std::string& out, const Complex& z) {
  put_f64(out, z.real());
  put_f64(out, z.imag());
}

}  // namespace

void save_table(const EigenTable& table, const std::filesystem::path& path) {
  std::string payload;
  payload.reserve(32 + size_t(table.grid.count) * (9 + 2 * 81) * 16);
  payload.append(kMagic, 4);
  put_u32(payload, kVersion);
  put_f64(payload, table.grid.vmin);
  put_f64(payload, table.grid.dv);
  put_u32(payload, table.grid.count);
  put_u32(payload, kStates);
  for (const EigenDecomposition& e : table.entries) {
    for (int i = 0; i < kStates; ++i) put_complex(payload, e.values[i]);
    for (int c = 0; c < kStates; ++c)
      for (int r = 0; r < kStates; ++r) put_complex(payload, e.vectors(r, c));
    for (int c = 0; c < kStates; ++c)
      for (int r = 0; r < kStates; ++r) put_complex(payload, e.inverse(r, c));
  }

  // Write through a temp file so a failed write never leaves a partial table.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TableIoError("cannot open " + tmp.string() + " for writing");
    out.write(payload.data(), std::streamsize(payload.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw TableIoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw TableIoError("cannot move table into place at " + path.string());
  }
}

EigenTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableIoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw TableIoError("read failed for " + path.string());

  Reader r{reinterpret_cast<const unsigned char*>(bytes.data()),
           reinterpret_cast<const unsigned char*>(bytes.data()) + bytes.size()};
  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0) throw TableFormatError("bad magic, not a table file");
  r.p += 4;
  if (r.u32() != kVersion) throw TableFormatError("unsupported table version");

  EigenTable table;
  const double vmin = r.f64();
  const double dv = r.f64();
  const std::uint32_t count = r.u32();
  if (r.u32() != kStates) throw TableFormatError("table was built for a different chain size");
  if (!(dv > 0.0) || count == 0) throw TableFormatError("corrupt grid header");
  table.grid.vmin = vmin;
  table.grid.dv = dv;
  table.grid.count = count;
  table.grid.vmax = table.grid.voltage(count - 1);

  const size_t expected = 32 + size_t(count) * (9 + 2 * 81) * 16;
  if (bytes.size() != expected) throw TableFormatError("table file truncated");

  // note: the (re, im) pairs must be read in sequenced statements, not as
  // constructor arguments, whose evaluation order is unspecified
  auto read_complex = [&r]() {
    const double re = r.f64();
    const double im = r.f64();
    return Complex(re, im);
  };
  table.entries.resize(count);
  for (EigenDecomposition& e : table.entries) {
    for (int i = 0; i < kStates; ++i) e.values[i] = read_complex();
    for (int c = 0; c < kStates; ++c)
      for (int rw = 0; rw < kStates; ++rw) e.vectors(rw, c) = read_complex();
    for (int c = 0; c < kStates; ++c)
      for (int rw = 0; rw < kStates; ++rw) e.inverse(rw, c) = read_complex();
  }
  if (r.p != r.end) throw TableFormatError("trailing bytes after table payload");
  return table;
}

StepperTable build_stepper(const EigenTable& table, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_stepper: dt must be positive");
  StepperTable s;
  s.grid = table.grid;
  s.dt = dt;
  s.transition.resize(table.entries.size());
  for (std::uint32_t j = 0; j < table.entries.size(); ++j) {
    double residue = 0.0;
    Mat9 t;
    try {
      t = exp_via_eig(table.entries[j], dt, &residue);
      s.max_imag_residue = std::max(s.max_imag_residue, residue);
    } catch (const EigenError& ex) {
      std::ostringstream msg;
      msg << "stepper entry at " << table.grid.voltage(j) << " mV: " << ex.what();
      throw TableBuildError(msg.str());
    }
    for (int c = 0; c < kStates; ++c) {
      double colsum = 0.0;
      for (int rw = 0; rw < kStates; ++rw) colsum += t(rw, c);
      if (std::fabs(colsum - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "stepper entry at " << table.grid.voltage(j) << " mV: column " << c
            << " sums to " << colsum;
        throw TableBuildError(msg.str());
      }
    }
    s.transition[j] = t;
  }
  return s;
}

RateTable build_rate_table(const VoltageGrid& grid) {
  RateTable t;
  t.grid = grid;
  t.rates.reserve(grid.count);
  for (std::uint32_t j = 0; j < grid.count; ++j) t.rates.push_back(eval_rates(grid.voltage(j)));
  return t;
}

}  // namespace mcina
