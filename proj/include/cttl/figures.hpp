#pragma once

#include <string>

#include "cttl/scenario.hpp"

namespace cttl {

/// Plot-data generators for the reference experiments: network load against
/// SBS density, inter-request burstiness, update frequency and update cost.
enum class FigureId { Density, Shape, UpdateFreq, UpdateCost };

FigureId figure_from_string(const std::string& s);
const char* to_string(FigureId id);

struct FigureOptions {
  double gap_tol = 1e-4;
  long node_limit = 1000000;
  double time_limit_s = 300.0;  // per MILP solve
  int jobs = 0;                 // OpenMP threads for sweep points; 0 = default
};

/// Solves every sweep point of the figure and writes one CSV (x column plus
/// one y column per caching mode / variant, documented in header comments).
/// Points re-solve from scratch and the output ordering is deterministic.
void write_figure_csv(FigureId id, const Scenario& base,
                      const std::string& out_path, const FigureOptions& opts);

}  // namespace cttl
