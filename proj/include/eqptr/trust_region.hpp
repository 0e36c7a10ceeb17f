#pragma once

#include <functional>
#include <vector>

#include "eqptr/types.hpp"

namespace eqptr {

struct TrConfig {
  double delta0{0.1};
  double eta1{0.1};
  double eta2{0.75};
  double gamma1{0.5};
  double gamma2{1.0};
  double delta_max{10.0};
  int max_iters{50};
  double kappa_hat{1e-6};
  double kappa_fcd{0.25}; // fraction-of-Cauchy-decrease constant
  void validate() const;
};

/// Quadratic model around a fixed center, plus the true function data the
/// builder computed there anyway (used for the stop test and rho).
struct ModelHandle {
  Vec center;
  double f_center{0};   // m(center), the (hyper)reduced AL value
  Vec grad_center;      // inexact model gradient at the center
  std::function<Vec(const Vec&)> hessvec; // v -> H v, H constant
  double f_true_center{0};
  Vec grad_true_center; // exact gradient at the center
  double phi{0};        // error indicator
  int basis_size{0};
  double eqp_usage{1.0};

  double value(const Vec& mu) const;
  Vec gradient(const Vec& mu) const;
};

/// Builds the model at center mu with radius delta; chi_m_prev is the model
/// criticality norm from the previous iteration (inf on the first).
using ModelBuilder = std::function<ModelHandle(const Vec& mu, double delta, double chi_m_prev)>;
using TrueObjective = std::function<double(const Vec& mu)>;

struct TrIterRecord {
  int k{0};
  double delta{0};
  double chi_m_inf{0}, chi_m_2{0}; // model criticality at the center
  double chi_true_inf{0};         // true criticality at the center
  double beta{0};                 // 1 + estimated Hessian norm
  double pred_decrease{0};
  double actual_decrease{0};
  double rho{0};
  bool accepted{false};
  double fcd_rhs{0};              // kappa ||chi_m|| min(||chi_m||/beta, delta)
  double f_true_center{0};
  double f_model_center{0};
  int basis_size{0};
  double eqp_usage{1.0};
  double phi{0};
};

struct TrOutcome {
  Vec mu;
  double f_true{0};
  Vec grad_true;
  double chi_inf{0};
  bool converged{false};
  int n_iters{0};
  std::vector<TrIterRecord> trace;
  double max_projection_gap_violation{0}; // ||chi_m - chi|| - ||grad_m - grad||
};

Vec project_box(const Vec& x, const Vec& lower, const Vec& upper);
Vec criticality(const Vec& mu, const Vec& grad, const Vec& lower, const Vec& upper);

Vec generalized_cauchy_point(const ModelHandle& model, const Vec& mu, double delta,
                             const Vec& lower, const Vec& upper);
Vec solve_subproblem(const ModelHandle& model, const Vec& mu, double delta, const Vec& lower,
                     const Vec& upper);

/// 20-step power iteration estimate of ||H||_2 through Hessian-vector products.
double estimate_hessian_norm(const std::function<Vec(const Vec&)>& hessvec, int dim,
                             int steps = 20);

TrOutcome run_trust_region(const Vec& mu0, const Vec& lower, const Vec& upper,
                           const ModelBuilder& build, const TrueObjective& f_true,
                           const TrConfig& config, double omega);

}  // namespace eqptr
