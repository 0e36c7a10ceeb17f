#pragma once

#include <vector>

#include "eqptr/auglag.hpp"
#include "eqptr/eqp.hpp"
#include "eqptr/problem.hpp"
#include "eqptr/rom.hpp"
#include "eqptr/trust_region.hpp"

namespace eqptr {

/// Raw primal/adjoint snapshots; deviations against the current affine offset
/// are formed at basis-build time.
struct SnapshotStore {
  Mat U; // primal states, one column per visited center
  Mat V; // adjoint states
  int count() const { return (int)U.cols(); }
  Mat deviations(const Vec& offset) const;
};

void update_snapshots(SnapshotStore& store, const Vec& u_star, const Vec& lambda_star);

struct ToleranceSchedule {
  double kappa{1.0};      // kappa1..kappa6, all equal
  double kappa_hat{1e-6};
  double delta_dv{1e-6};
  double delta_lq{1e-6};
  double delta_rs{5e-4};
  double delta_min{1e-14};
};

/// Eq.-(50)-style split: rp/lra/lga get (kappa_hat / 6 kappa) min(chi, Delta),
/// the c-families the same value divided by tau; all floored at delta_min.
EqpTolerances schedule_tolerances(const ToleranceSchedule& s, double chi_m_prev, double delta_k,
                                  double tau);

struct SolveCounters {
  long hdm{0}; // HDM primal Newton solves
  long rom{0}; // reduced primal Newton solves
  long eqp{0}; // hyperreduced primal Newton solves
};

struct EqpAuditRecord {
  int build_index{0};
  double usage{1.0};
  double worst_violation{0}; // audit_weights result (negative = all rows hold)
  bool rho1_feasible{true};
  bool lp_failed{false};
  int lp_rows{0};
  int basis_size{0};
  EqpTolerances tol;
};

struct BuilderConfig {
  Subsolver mode{Subsolver::Eqp};
  ToleranceSchedule schedule;
  ConstraintPreset preset{ConstraintPreset::Full};
  int max_pod{20};     // p_k = q_k = min(k, max_pod)
  double fd_eps{1e-6}; // Hessian-vector finite-difference step
  NewtonOptions newton;
  // Audit hook: invoked after each LP training with the assembled instance
  // and the trained weights (used by --dump-lp).
  std::function<void(int build_index, const TrainingLp&, const EqpWeights&)> lp_sink;
};

/// Model factory for one major iteration (fixed theta, tau). Supplies the
/// quadratic trust-region model (Algorithm 3 step 1) and true-objective
/// evaluations, and tracks snapshots, solve counts, and EQP audits.
class MajorModelBuilder {
public:
  MajorModelBuilder(const Problem& p, const BuilderConfig& config, const ALContext& ctx,
                    SnapshotStore inherited, SolveCounters* counters);

  ModelHandle build(const Vec& mu, double delta, double chi_m_prev);
  double f_true(const Vec& mu);

  /// HDM primal solution at mu, cached across repeated requests.
  const Vec& hdm_state(const Vec& mu);

  const SnapshotStore& store() const { return store_; }
  const std::vector<EqpAuditRecord>& audits() const { return audits_; }
  const ALContext& context() const { return ctx_; }

  /// FD Hessian-vector product through the current model core; exposed for
  /// testing. Shrinks eps once by 10 on solver failure.
  Vec hessvec_fd(const ReducedBasis& basis, const EqpWeights& weights, const Vec& mu_center,
                 const Vec& grad_center, const Vec& v, double eps);

private:
  struct CachedCenter {
    Vec mu;
    Vec u_star;
    Vec lambda_star;
  };
  const CachedCenter& solve_center(const Vec& mu);

  const Problem& p_;
  BuilderConfig cfg_;
  ALContext ctx_;
  SnapshotStore store_;
  SolveCounters* counters_;
  std::vector<EqpAuditRecord> audits_;
  std::vector<CachedCenter> centers_; // in visit order; snapshots follow this
  Mat sens0_;                         // HDM sensitivity at the major's start
  bool have_sens0_{false};
  Vec warm_u_; // warm start for f_true solves
  int builds_{0};
};

}  // namespace eqptr
