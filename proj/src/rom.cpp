#include "eqptr/rom.hpp"

namespace eqptr {

Vec reduced_residual(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu) {
  return basis.columns.transpose() * assemble_residual(p, basis.reconstruct(y), mu);
}

Mat reduced_jacobian(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu) {
  Mat dr_du = assemble_jacobians(p, basis.reconstruct(y), mu).dr_du;
  return basis.columns.transpose() * dr_du * basis.columns;
}

Mat reduced_residual_dmu(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu) {
  Mat dr_dmu = assemble_jacobians(p, basis.reconstruct(y), mu).dr_dmu;
  return basis.columns.transpose() * dr_dmu;
}

Vec reduced_constraints(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu) {
  return assemble_constraints(p, basis.reconstruct(y), mu);
}

double reduced_al(const Problem& p, const ReducedBasis& basis, const Vec& y, const Vec& mu,
                  const ALContext& ctx) {
  return al_value(p, basis.reconstruct(y), mu, ctx);
}

double reduced_al_lagrangian(const Problem& p, const ReducedBasis& basis, const Vec& y,
                             const Vec& mu, const ALContext& ctx) {
  return al_lagrangian(p, basis.reconstruct(y), mu, ctx);
}

Vec solve_reduced_primal(const Problem& p, const ReducedBasis& basis, const Vec& mu,
                         const NewtonOptions& opts, const Vec* y_guess) {
  if (basis.size() == 0) throw std::invalid_argument("solve_reduced_primal: empty basis");
  Vec y = y_guess ? *y_guess : Vec::Zero(basis.size());
  Vec r = reduced_residual(p, basis, y, mu);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (rnorm > opts.tol && it < opts.max_iters) {
    Mat J = reduced_jacobian(p, basis, y, mu);
    Vec dy = Eigen::PartialPivLU<Mat>(J).solve(-r);
    if (!dy.allFinite()) throw LinearAlgebraError("solve_reduced_primal: singular Jacobian");
    double alpha = 1.0;
    Vec y_trial;
    double rnorm_trial = rnorm;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      y_trial = y + alpha * dy;
      Vec r_trial = reduced_residual(p, basis, y_trial, mu);
      rnorm_trial = r_trial.lpNorm<Eigen::Infinity>();
      if (rnorm_trial < rnorm || rnorm_trial <= opts.tol) {
        r = r_trial;
        break;
      }
      alpha *= 0.5;
    }
    if (rnorm_trial >= rnorm && rnorm_trial > opts.tol)
      throw SolverError("solve_reduced_primal: line search stalled", rnorm);
    y = y_trial;
    rnorm = rnorm_trial;
    ++it;
  }
  if (rnorm > opts.tol) throw SolverError("solve_reduced_primal: Newton did not converge", rnorm);
  return y;
}

Vec solve_reduced_adjoint(const Problem& p, const ReducedBasis& basis, const Vec& y_hat,
                          const Vec& mu, const ALContext& ctx) {
  Vec u = basis.reconstruct(y_hat);
  Mat J = reduced_jacobian(p, basis, y_hat, mu);
  RowVec dj_du = assemble_objective_derivs(p, u, mu).dj_du;
  Mat dc_du = assemble_constraint_derivs(p, u, mu).dc_du;
  Vec c = assemble_constraints(p, u, mu);
  // dl_hat/dy = (dj/du - theta' dc/du + tau c' dc/du) Phi
  RowVec dl_du = dj_du - ctx.theta.transpose() * dc_du + ctx.tau * c.transpose() * dc_du;
  Vec rhs = (dl_du * basis.columns).transpose();
  Vec lam = Eigen::PartialPivLU<Mat>(J.transpose()).solve(rhs);
  if (!lam.allFinite()) throw LinearAlgebraError("solve_reduced_adjoint: singular Jacobian");
  return lam;
}

Mat solve_reduced_sensitivity(const Problem& p, const ReducedBasis& basis, const Vec& y_hat,
                              const Vec& mu) {
  Mat J = reduced_jacobian(p, basis, y_hat, mu);
  Mat rhs = -reduced_residual_dmu(p, basis, y_hat, mu);
  Mat w = Eigen::PartialPivLU<Mat>(J).solve(rhs);
  if (!w.allFinite()) throw LinearAlgebraError("solve_reduced_sensitivity: singular Jacobian");
  return w;
}

ReducedValueGradient reduced_al_value_gradient(const Problem& p, const ReducedBasis& basis,
                                               const Vec& mu, const ALContext& ctx,
                                               const NewtonOptions& opts) {
  ReducedValueGradient out;
  out.y_hat = solve_reduced_primal(p, basis, mu, opts);
  out.lambda_hat = solve_reduced_adjoint(p, basis, out.y_hat, mu, ctx);
  Vec u = basis.reconstruct(out.y_hat);
  out.f = al_value(p, u, mu, ctx);
  out.grad = gradient_from_adjoint(p, basis.columns * out.lambda_hat, u, mu, ctx).transpose();
  return out;
}

}  // namespace eqptr
