#pragma once

#include "eqptr/basis.hpp"
#include "eqptr/hdm.hpp"
#include "eqptr/problem.hpp"

namespace eqptr {

/// Galerkin reduced-order model built on top of the full-space assembly
/// routines: every reduced quantity here is evaluated as Phi' (full assembly),
/// which the element-wise hyperreduced path is checked against at rho = 1.

struct ReducedSolution {
  Vec y_hat;      // reduced primal coordinates
  Vec lambda_hat; // reduced adjoint
  Mat sens_hat;   // n x N_mu reduced sensitivity
};

Vec reduced_residual(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu);
Mat reduced_jacobian(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu);
Mat reduced_residual_dmu(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu);

Vec reduced_constraints(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu);
double reduced_al(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu,
                  const ALContext& ctx);
double reduced_al_lagrangian(const Problem& p, const ReducedBasis& basis, const Vec& y,
                             const Vec& mu, const ALContext& ctx);

Vec solve_reduced_primal(const Problem& p, const ReducedBasis& basis, const Vec& mu,
                         const NewtonOptions& opts = {}, const Vec* y_guess = nullptr);
Vec solve_reduced_adjoint(const Problem& p, const ReducedBasis& basis, const Vec& y_hat,
                          const Vec& mu, const ALContext& ctx);
Mat solve_reduced_sensitivity(const Problem& p, const ReducedBasis& basis, const Vec& y_hat,
                              const Vec& mu);

struct ReducedValueGradient {
  double f{0};
  Vec grad;
  Vec y_hat;
  Vec lambda_hat;
};
ReducedValueGradient reduced_al_value_gradient(const Problem& p, const ReducedBasis& basis,
                                               const Vec& mu, const ALContext& ctx,
                                               const NewtonOptions& opts = {});

}  // namespace eqptr
