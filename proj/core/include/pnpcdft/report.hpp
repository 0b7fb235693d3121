#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnpcdft/grid.hpp"
#include "pnpcdft/gummel.hpp"

namespace pnpcdft {

// Everything a finished (or aborted) solve has to say for itself. The config
// echo is complete, so the report alone is enough to reproduce the run.
struct SolveReport {
  std::string version;
  std::string git_revision;

  std::vector<std::pair<std::string, std::string>> config;

  std::vector<IterationRecord> equilibrium;
  std::vector<IterationRecord> transport;
  bool converged = false;
  std::string termination;  // empty on success, else the stopping condition

  double sigma_S_per_cm = 0.0;
  double short_range_energy_eV = 0.0;
  double plane_flux_spread = 0.0;
  double max_packing = 0.0;
  std::vector<std::string> species_names;
  std::vector<double> species_plane_current;  // mean over planes, 1/s

  // Wall-clock split. Volatile: excluded from the canonical form.
  double total_seconds = 0.0;
  double solver_seconds = 0.0;
  double fft_seconds = 0.0;
  double quadrature_seconds = 0.0;
};

// Full JSON document, keys sorted. Timing fields included.
std::string report_to_json(const SolveReport& report);

// Same document with every wall-clock field removed; two runs of the same
// configuration on the same build produce identical canonical strings.
std::string report_to_canonical_json(const SolveReport& report);

SolveReport report_from_json(const std::string& text);

void write_report_file(const std::string& path, const SolveReport& report);
SolveReport read_report_file(const std::string& path);

// On-disk snapshot of the outer iteration: one field file per unknown plus a
// manifest. A run restarted from a checkpoint continues from its phase.
struct Checkpoint {
  std::string phase;  // "equilibrium", "transport", or "abort"
  int iteration = 0;
  SystemState state;
  std::vector<std::string> species_names;
};

void write_checkpoint(const std::string& directory, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::string& directory);

}  // namespace pnpcdft
