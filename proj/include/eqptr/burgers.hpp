#pragma once

#include <functional>

#include "eqptr/problem.hpp"

namespace eqptr {

/// 1D steady viscous Burgers inverse design on [0,1]: cell-centered finite
/// volumes, Dirichlet boundaries, parametric Gaussian source bumps, integral
/// objective and side constraints (one equality, one inequality with slack).
struct BurgersConfig {
  int n_cells{128};
  double viscosity{0.05};
  int n_design{8};          // source-amplitude parameters
  double bc_left{1.0};
  double bc_right{0.0};
  double design_lower{-2.0};
  double design_upper{2.0};
  double bump_width{0.1};
  bool use_equality{true};
  bool use_inequality{true};
  double slack_upper{1e12}; // finite stand-in for +inf

  // Filled by generate_target (or by hand for synthetic tests).
  Vec target_state;   // length n_cells
  double volume_rhs{0};   // V_eq for c1 = int u - V_eq
  double quadratic_rhs{0}; // Q_max for c2 = int u^2 - Q_max + s

  // Optional fixed source term added to the residual, evaluated at cell
  // centers. Used by manufactured-solution tests.
  std::function<double(double)> fixed_source;

  double cell_width() const { return 1.0 / n_cells; }
  double cell_center(int e) const { return (e + 0.5) * cell_width(); }
  int n_slack() const { return use_inequality ? 1 : 0; }
  int n_params() const { return n_design + n_slack(); }

  void validate() const;
};

/// Gaussian source bump p evaluated at x.
double burgers_bump(const BurgersConfig& cfg, int p, double x);

/// Builds the elemental Problem for the given config.
Problem make_problem(const BurgersConfig& cfg);

struct TargetInfo {
  Vec target_state;
  double volume_integral{0};    // int u* at mu_true
  double quadratic_integral{0}; // int (u*)^2 at mu_true
};

/// Solves the HDM at mu_true (design parameters only) and records the target
/// state and the constraint integrals at the solution.
TargetInfo generate_target(const BurgersConfig& cfg, const Vec& mu_true_design);

/// Convenience: generates the target at mu_true and fills the constraint
/// right-hand sides with the perturbed values V_eq = 0.98 V, Q_max = 1.01 Q,
/// so that the experiment starts infeasible.
BurgersConfig make_default_testbed(BurgersConfig cfg, const Vec& mu_true_design);

/// Deterministic "true" design used by the standard experiments.
Vec default_mu_true(const BurgersConfig& cfg);

/// Initial optimization iterate: zero design amplitudes, zero slack.
Vec initial_parameters(const BurgersConfig& cfg);

}  // namespace eqptr
