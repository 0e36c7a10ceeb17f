#pragma once

#include <stdexcept>
#include <string>

#include "eqptr/auglag.hpp"
#include "eqptr/burgers.hpp"
#include "eqptr/model_builder.hpp"
#include "eqptr/trust_region.hpp"

namespace eqptr {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One optimization run: testbed, outer/inner solver settings, EQP settings.
/// Parsed from a key = value file with dotted section prefixes; unknown keys
/// are rejected.
struct RunConfig {
  BurgersConfig testbed;
  AuglagConfig auglag;
  TrConfig trustregion;
  ToleranceSchedule schedule;
  ConstraintPreset preset{ConstraintPreset::Full};
  int max_pod{20};
  double fd_eps{1e-6};
  std::string method{"eqp"}; // hdm | rom | eqp
  int snapshot_inherit{0};   // snapshot columns carried across major iterations
  unsigned seed{0};
  std::string out_dir{"out"};
  bool dump_lp{false};

  Subsolver subsolver() const;
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// The documented config grammar (printed by the CLI on request).
std::string config_grammar();

}  // namespace eqptr
