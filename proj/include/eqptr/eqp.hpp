#pragma once

#include <vector>

#include "eqptr/basis.hpp"
#include "eqptr/hdm.hpp"
#include "eqptr/lp.hpp"
#include "eqptr/problem.hpp"
#include "eqptr/rom.hpp"

namespace eqptr {

/// Nonnegative element weights produced by the EQP training LP.
struct EqpWeights {
  Vec rho;
  std::vector<int> active_set;
  static EqpWeights from_rho(Vec rho, double zero_clamp = 1e-10);
  static EqpWeights ones(int n_elements);
  double usage_fraction() const {
    return rho.size() == 0 ? 0.0 : (double)active_set.size() / (double)rho.size();
  }
};

/// The nine accuracy tolerances of the training LP.
struct EqpTolerances {
  double dv{1e-6};
  double rp{0}, lra{0}, lga{0};
  double c{0}, dcmu{0}, dcy{0};
  double rs{5e-4};
  double lq{1e-6};
};

enum class ConstraintPreset {
  Convergence, // dv, rp, lra, lga, c, dcmu, dcy
  Full,        // Convergence + rs, lq
};

/// A training parameter point with its precomputed reduced solutions.
struct TrainingPoint {
  Vec mu;
  Vec y_hat;
  Vec lambda_hat;
  Mat sens_hat;
};

TrainingPoint make_training_point(const Problem& p, const ReducedBasis& basis, const Vec& mu,
                                  const ALContext& ctx, const NewtonOptions& opts = {});

/// All hyperreduced quantities at frozen inputs (y, lambda, sens, mu),
/// evaluated by looping over the active elements only. Sizes below use
/// n = basis size. lambda (reduced adjoint) and sens (reduced sensitivity)
/// may be passed empty; the dependent fields are then left empty too.
struct HyperBundle {
  double ell{0};       // weighted AL value
  double ell_lag{0};   // weighted Lagrangian part
  Vec c;               // weighted constraints               (N_c)
  Vec r;               // weighted primal residual           (n)
  Vec r_lag_adj;       // weighted Lagrangian adjoint resid  (n)
  Vec r_adj;           // full weighted adjoint residual     (n)
  RowVec g_lag_adj;    // weighted Lagrangian gradient       (1 x N_mu)
  RowVec g_adj;        // full weighted gradient             (1 x N_mu)
  Mat sens_res;        // weighted sensitivity residual      (n x N_mu)
  Mat dc_dy;           // weighted d c / d y                 (N_c x n)
  Mat dc_dmu;          // weighted d c / d mu                (N_c x N_mu)
};

HyperBundle hyper_evaluate(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                           const Vec& y, const Vec& lambda, const Mat& sens, const Vec& mu,
                           const ALContext& ctx);

Vec hyper_residual(const Problem& p, const ReducedBasis& basis, const EqpWeights& w, const Vec& y,
                   const Vec& mu);
Vec solve_hyper_primal(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                       const Vec& mu, const NewtonOptions& opts = {}, const Vec* y_guess = nullptr);
Vec solve_hyper_adjoint(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                        const Vec& y, const Vec& mu, const ALContext& ctx);
Mat solve_hyper_sensitivity(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                            const Vec& y, const Vec& mu);

struct HyperValueGradient {
  double f{0};
  Vec grad;
  Vec y_tilde;
  Vec lambda_tilde;
};
HyperValueGradient hyper_f_and_gradient(const Problem& p, const ReducedBasis& basis,
                                        const EqpWeights& w, const Vec& mu, const ALContext& ctx,
                                        const NewtonOptions& opts = {},
                                        const Vec* y_guess = nullptr);

/// Training LP with labelled rows so solutions can be audited independently.
struct TrainingLp {
  LpInstance lp;
  struct Row {
    std::string family;
    int training_point{0};
    double bound{0};     // effective right-hand tolerance of the two-sided row
    Vec coeffs;          // a_row
    double target{0};    // b_row (rho = 1 value)
  };
  std::vector<Row> rows;
};

TrainingLp assemble_training_lp(const Problem& p, const ReducedBasis& basis,
                                const std::vector<TrainingPoint>& training_set,
                                const EqpTolerances& tol, const ALContext& ctx,
                                ConstraintPreset preset);

struct TrainResult {
  EqpWeights weights;
  bool lp_failed{false}; // fell back to rho = 1
  double objective{0};
  int lp_iterations{0};
};
TrainResult train_weights(const TrainingLp& tlp);

/// Re-checks every row of the training LP against a weight vector,
/// independently of the LP solve. Returns the worst violation (residual
/// minus bound), negative when all rows hold.
double audit_weights(const TrainingLp& tlp, const EqpWeights& w);

}  // namespace eqptr
