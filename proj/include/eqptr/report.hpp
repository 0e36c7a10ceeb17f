#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "eqptr/driver.hpp"

namespace eqptr {

/// Shortest round-trippable decimal with 17 significant digits.
std::string fmt17(double x);

/// S_i = |j_i - j*| / j_initial (normalized distance from the optimum).
double compute_si(double j_i, double j_star, double j_initial);

void write_history_csv(std::ostream& os, const RunResult& rr, double j_star);
void write_trace_jsonl(std::ostream& os, const RunResult& rr);
void write_summary_json(std::ostream& os, const RunResult& rr, double j_star);

struct NamedRun {
  std::string name;
  const RunResult* run{nullptr};
};

/// Tables-2..7-style cutoff comparison: for each (eps, ctol) cell, the cost of
/// each method to first reach S_i < eps with ||c||_inf <= ctol, plus speedup
/// relative to the hdm baseline run.
void write_comparison_csv(std::ostream& os, const std::vector<NamedRun>& runs, double j_star);

struct StudyRow {
  std::string label;
  double tau0{0}, scale_a{0};
  int snapshot_inherit{0};
  bool converged{false};
  bool failed{false};
  int majors{0};
  int majors_to_feasibility{-1};
  double j{0}, c_inf{0}, chi_inf{0};
  double wall_seconds{0};
};
StudyRow make_study_row(const std::string& label, const RunResult& rr, double pi_star);
void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);

/// JSON dump of a training LP and its trained weights (--dump-lp).
void write_lp_dump(std::ostream& os, const TrainingLp& tlp, const EqpWeights& w);

}  // namespace eqptr
