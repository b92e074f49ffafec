#pragma once

// Voltage-indexed tables: eigendecompositions of the generator on a fine
// grid of membrane potentials, per-timestep transition matrices derived from
// them, and plain transition-rate tables for the tabulated explicit solvers.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mcina/eig.hpp"
#include "mcina/mc_model.hpp"

namespace mcina {

class TableIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TableFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an entry of a table under construction fails its quality
// contract; carries the offending voltage in the message.
class TableBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VoltageGrid {
  double vmin = -100.0;  // mV
  double vmax = 70.0;    // mV
  double dv = 0.01;      // mV
  std::uint32_t count = 17001;

  // count = floor((vmax - vmin)/dv) + 1; vmax is snapped to the last grid
  // point so the stored range is self-consistent.
  static VoltageGrid from_range(double vmin, double vmax, double dv);

  double voltage(std::uint32_t j) const { return vmin + j * dv; }

  // Index of the grid potential nearest to vm. Out-of-range potentials clamp
  // to the first/last entry; exact midpoints round half away from zero.
  std::uint32_t lookup(double vm) const;

  bool operator==(const VoltageGrid& o) const {
    return vmin == o.vmin && dv == o.dv && count == o.count;
  }
};

struct EigenTable {
  VoltageGrid grid;
  std::vector<EigenDecomposition> entries;  // one per grid voltage

  bool operator==(const EigenTable& o) const { return grid == o.grid && entries == o.entries; }
};

// Decompose the generator at every grid voltage. Entries must meet the
// decompose() residual contract; a failure aborts with the offending voltage.
// threads = 0 picks the hardware concurrency.
EigenTable build_eigen_table(const VoltageGrid& grid, unsigned threads = 0);

// Binary table file, little-endian:
//   magic "MCXT", version u32 = 1, vmin f64, dv f64, count u32, nstates u32=9,
//   then per voltage: 9 eigenvalues as (re,im) f64 pairs, S as 81 (re,im)
//   pairs column-major, S^-1 likewise.
void save_table(const EigenTable& table, const std::filesystem::path& path);
EigenTable load_table(const std::filesystem::path& path);

// Transition matrices T_j = S exp(D dt) S^-1 for one fixed timestep.
struct StepperTable {
  VoltageGrid grid;
  double dt = 0.0;  // ms
  std::vector<Mat9> transition;
  // worst imaginary residue discarded by the real cast; telemetry for the
  // consistency of the eigen-pairing (values above ~1e-12 deserve a look)
  double max_imag_residue = 0.0;
};

// Exponentiate every table entry for the given dt. Column sums of each T_j
// are verified to be 1 within 1e-10 during the build.
StepperTable build_stepper(const EigenTable& table, double dt);

// Plain per-voltage transition rates, for the tabulated FE/HOS variants.
struct RateTable {
  VoltageGrid grid;
  std::vector<RateSet> rates;
};

RateTable build_rate_table(const VoltageGrid& grid);

}  // namespace mcina
