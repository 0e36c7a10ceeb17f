#pragma once

#include <string>
#include <vector>

#include "eqptr/config.hpp"

namespace eqptr {

/// Per-major bookkeeping the outer loop itself does not track.
struct MajorExtra {
  std::vector<EqpAuditRecord> audits;
  long cum_hdm{0}, cum_rom{0}, cum_eqp{0};
  double usage_min{1.0}, usage_max{1.0};
};

struct RunResult {
  RunConfig config;
  AuglagResult result;
  std::vector<MajorExtra> extras; // parallel to result.majors
  SolveCounters counters;
  double wall_seconds{0};
  double j_initial{0}; // objective at the starting design
  Vec mu0;
  bool failed{false};
  std::string error;
};

using LpDumpSink = std::function<void(int major, int build, const TrainingLp&, const EqpWeights&)>;

RunResult run_optimization(const RunConfig& cfg, const LpDumpSink& lp_dump = {});

/// High-accuracy HDM reference objective j* (omega* = 1e-10) for S_i.
double compute_reference_jstar(const RunConfig& cfg);

}  // namespace eqptr
