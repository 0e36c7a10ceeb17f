#pragma once

#include <functional>
#include <vector>

#include "eqptr/trust_region.hpp"
#include "eqptr/types.hpp"

namespace eqptr {

enum class Subsolver { Hdm, Rom, Eqp };

struct AuglagConfig {
  double tau0{10.0};
  double scale_a{50.0};
  double pi_star{1e-6};
  double omega_star{1e-5};
  int max_major_iters{30};
  Subsolver subsolver{Subsolver::Eqp};
  void validate() const;
};

struct MajorRecord {
  int i{0};
  Vec theta;
  double tau{0};
  double pi{0};
  double omega{0};
  Vec mu_star;
  double j{0};              // objective at the subproblem solution
  double c_inf{0};          // ||c||_inf, reported
  double c_2{0};            // ||c||_2, used by the branch test
  double chi_inf{0};        // true criticality at the subproblem solution
  bool feasible_branch{false};
  int tr_iters{0};
  double wall_seconds{0};
  std::vector<TrIterRecord> tr_trace;
};

struct AuglagResult {
  bool converged{false};
  Vec mu;
  double j{0};
  double c_inf{0};
  double chi_inf{0};
  std::vector<MajorRecord> majors;
};

Vec update_multipliers(const Vec& theta, double tau, const Vec& c_value);

/// One bound-constrained AL subproblem: minimize the AL function for fixed
/// (theta, tau) over the box, to criticality tolerance omega. Returns the
/// solution plus the data the outer loop needs. Implemented by the driver
/// (eqpbtr glue) for each subsolver flavor.
struct SubproblemResult {
  Vec mu;
  double f{0};       // AL value at mu
  double j{0};       // plain objective at mu
  Vec c;             // constraints at mu
  double chi_inf{0}; // true criticality at mu
  int tr_iters{0};
  std::vector<TrIterRecord> tr_trace;
};
using SubproblemSolver =
    std::function<SubproblemResult(const Vec& mu_guess, const ALContext& ctx, double omega)>;

AuglagResult run_auglag(const Vec& mu0, int n_constraints, const AuglagConfig& config,
                        const SubproblemSolver& solve_subproblem);

}  // namespace eqptr
