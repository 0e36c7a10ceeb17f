#pragma once

#include <optional>

#include "eqptr/problem.hpp"

namespace eqptr {

struct NewtonOptions {
  double tol{1e-12};       // infinity-norm residual tolerance
  int max_iters{50};
  int max_halvings{20};    // backtracking line search
};

struct NewtonResult {
  Vec u;
  int iters{0};
  double residual_norm{0};
};

struct PrimalAdjointPair {
  Vec u_star;
  Vec lambda_star;
  Vec mu;
};

/// Sum of scattered element residuals, accumulated in ascending element index.
Vec assemble_residual(const Problem& p, const Vec& u, const Vec& mu);

/// Global objective j(u, mu) = sum_e j_e.
double assemble_objective(const Problem& p, const Vec& u, const Vec& mu);

/// Global side constraints c(u, mu) = sum_e c_e.
Vec assemble_constraints(const Problem& p, const Vec& u, const Vec& mu);

struct Jacobians {
  Mat dr_du;  // N_u x N_u
  Mat dr_dmu; // N_u x N_mu
};
Jacobians assemble_jacobians(const Problem& p, const Vec& u, const Vec& mu);

struct ObjectiveDerivs {
  RowVec dj_du;  // 1 x N_u
  RowVec dj_dmu; // 1 x N_mu
};
ObjectiveDerivs assemble_objective_derivs(const Problem& p, const Vec& u, const Vec& mu);

struct ConstraintDerivs {
  Mat dc_du;  // N_c x N_u
  Mat dc_dmu; // N_c x N_mu
};
ConstraintDerivs assemble_constraint_derivs(const Problem& p, const Vec& u, const Vec& mu);

/// Augmented Lagrangian value l(u, mu; theta, tau) = j - theta'c + tau/2 ||c||^2.
double al_value(const Problem& p, const Vec& u, const Vec& mu, const ALContext& ctx);

/// Lagrangian part l^L = j - theta'c.
double al_lagrangian(const Problem& p, const Vec& u, const Vec& mu, const ALContext& ctx);

/// Damped Newton on r(u, mu) = 0.
NewtonResult solve_primal(const Problem& p, const Vec& mu, const Vec& u_guess,
                          const NewtonOptions& opts = {});

/// Direct solve of (dr/du)' lambda = (dl/du)'.
Vec solve_adjoint(const Problem& p, const Vec& u_star, const Vec& mu, const ALContext& ctx);

/// Reduced-space AL value and adjoint gradient at mu: solves primal + adjoint.
struct ValueGradient {
  double f{0};
  Vec grad;
  Vec u_star;
  Vec lambda_star;
};
ValueGradient reduced_al_value_gradient(const Problem& p, const Vec& mu, const ALContext& ctx,
                                        const Vec* u_guess = nullptr,
                                        const NewtonOptions& opts = {});

/// Gradient reconstruction g^lambda = dl/dmu - z' dr/dmu at explicit (z, u, mu).
RowVec gradient_from_adjoint(const Problem& p, const Vec& z, const Vec& u, const Vec& mu,
                             const ALContext& ctx);

/// HDM sensitivity du*/dmu at (u_star, mu): solves (dr/du) w = -dr/dmu columnwise.
Mat solve_sensitivity(const Problem& p, const Vec& u_star, const Vec& mu);

}  // namespace eqptr
