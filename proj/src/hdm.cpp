#include "eqptr/hdm.hpp"

#include <cmath>

namespace eqptr {

void Problem::validate() const {
  if (n_elements <= 0 || n_state <= 0 || n_params < 0 || n_constraints < 0)
    throw std::invalid_argument("Problem: nonpositive dimensions");
  if (param_lower.size() != n_params || param_upper.size() != n_params)
    throw std::invalid_argument("Problem: parameter bound size mismatch");
  for (int i = 0; i < n_params; ++i)
    if (param_lower[i] > param_upper[i])
      throw std::invalid_argument("Problem: param_lower > param_upper");
  if ((int)elem_dofs.size() != n_elements || (int)elem_nbr_dofs.size() != n_elements)
    throw std::invalid_argument("Problem: connectivity size mismatch");
  std::vector<char> touched(n_state, 0);
  for (const auto& idx : elem_dofs)
    for (int i : idx) {
      if (i < 0 || i >= n_state) throw std::invalid_argument("Problem: dof index out of range");
      touched[i] = 1;
    }
  for (char t : touched)
    if (!t) throw std::invalid_argument("Problem: state index not covered by any element");
}

static void check_dims(const Problem& p, const Vec& u, const Vec& mu) {
  if (u.size() != p.n_state) throw std::invalid_argument("state vector dimension mismatch");
  if (mu.size() != p.n_params) throw std::invalid_argument("parameter vector dimension mismatch");
}

Vec assemble_residual(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  Vec r = Vec::Zero(p.n_state);
  for (int e = 0; e < p.n_elements; ++e) {
    Vec re = p.residual(e, p.gather(e, u), p.gather_nbr(e, u), mu);
    const auto& idx = p.elem_dofs[e];
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] += re[i];
  }
  return r;
}

double assemble_objective(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  double j = 0;
  for (int e = 0; e < p.n_elements; ++e) j += p.objective(e, p.gather(e, u), mu);
  return j;
}

Vec assemble_constraints(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  Vec c = Vec::Zero(p.n_constraints);
  for (int e = 0; e < p.n_elements; ++e) c += p.constraints(e, p.gather(e, u), mu);
  return c;
}

Jacobians assemble_jacobians(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  Jacobians J;
  J.dr_du = Mat::Zero(p.n_state, p.n_state);
  J.dr_dmu = Mat::Zero(p.n_state, p.n_params);
  for (int e = 0; e < p.n_elements; ++e) {
    Vec ue = p.gather(e, u), un = p.gather_nbr(e, u);
    Mat d_du = p.residual_du(e, ue, un, mu);
    Mat d_dun = p.residual_dun(e, ue, un, mu);
    Mat d_dmu = p.residual_dmu(e, ue, un, mu);
    const auto& idx = p.elem_dofs[e];
    const auto& nidx = p.elem_nbr_dofs[e];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t k = 0; k < idx.size(); ++k) J.dr_du(idx[i], idx[k]) += d_du(i, k);
      for (std::size_t k = 0; k < nidx.size(); ++k) J.dr_du(idx[i], nidx[k]) += d_dun(i, k);
      J.dr_dmu.row(idx[i]) += d_dmu.row(i);
    }
  }
  return J;
}

ObjectiveDerivs assemble_objective_derivs(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  ObjectiveDerivs d;
  d.dj_du = RowVec::Zero(p.n_state);
  d.dj_dmu = RowVec::Zero(p.n_params);
  for (int e = 0; e < p.n_elements; ++e) {
    Vec ue = p.gather(e, u);
    RowVec du = p.objective_du(e, ue, mu);
    const auto& idx = p.elem_dofs[e];
    for (std::size_t i = 0; i < idx.size(); ++i) d.dj_du[idx[i]] += du[i];
    d.dj_dmu += p.objective_dmu(e, ue, mu);
  }
  return d;
}

ConstraintDerivs assemble_constraint_derivs(const Problem& p, const Vec& u, const Vec& mu) {
  check_dims(p, u, mu);
  ConstraintDerivs d;
  d.dc_du = Mat::Zero(p.n_constraints, p.n_state);
  d.dc_dmu = Mat::Zero(p.n_constraints, p.n_params);
  for (int e = 0; e < p.n_elements; ++e) {
    Vec ue = p.gather(e, u);
    Mat du = p.constraints_du(e, ue, mu);
    const auto& idx = p.elem_dofs[e];
    for (std::size_t i = 0; i < idx.size(); ++i) d.dc_du.col(idx[i]) += du.col(i);
    d.dc_dmu += p.constraints_dmu(e, ue, mu);
  }
  return d;
}

double al_lagrangian(const Problem& p, const Vec& u, const Vec& mu, const ALContext& ctx) {
  return assemble_objective(p, u, mu) - ctx.theta.dot(assemble_constraints(p, u, mu));
}

double al_value(const Problem& p, const Vec& u, const Vec& mu, const ALContext& ctx) {
  Vec c = assemble_constraints(p, u, mu);
  return assemble_objective(p, u, mu) - ctx.theta.dot(c) + 0.5 * ctx.tau * c.squaredNorm();
}

NewtonResult solve_primal(const Problem& p, const Vec& mu, const Vec& u_guess,
                          const NewtonOptions& opts) {
  check_dims(p, u_guess, mu);
  if (!u_guess.allFinite()) throw std::invalid_argument("solve_primal: non-finite initial guess");
  Vec u = u_guess;
  Vec r = assemble_residual(p, u, mu);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (rnorm > opts.tol && it < opts.max_iters) {
    Mat J = assemble_jacobians(p, u, mu).dr_du;
    Eigen::PartialPivLU<Mat> lu(J);
    Vec du = lu.solve(-r);
    if (!du.allFinite())
      throw LinearAlgebraError("solve_primal: singular Jacobian");
    // Backtracking: halve until the residual norm decreases.
    double alpha = 1.0;
    Vec u_trial;
    double rnorm_trial = rnorm;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      u_trial = u + alpha * du;
      Vec r_trial = assemble_residual(p, u_trial, mu);
      rnorm_trial = r_trial.lpNorm<Eigen::Infinity>();
      if (rnorm_trial < rnorm || rnorm_trial <= opts.tol) {
        r = r_trial;
        break;
      }
      alpha *= 0.5;
    }
    if (rnorm_trial >= rnorm && rnorm_trial > opts.tol)
      throw SolverError("solve_primal: line search stalled", rnorm);
    u = u_trial;
    rnorm = rnorm_trial;
    ++it;
  }
  if (rnorm > opts.tol)
    throw SolverError("solve_primal: Newton did not converge", rnorm);
  return {u, it, rnorm};
}

Vec solve_adjoint(const Problem& p, const Vec& u_star, const Vec& mu, const ALContext& ctx) {
  Mat dr_du = assemble_jacobians(p, u_star, mu).dr_du;
  RowVec dj_du = assemble_objective_derivs(p, u_star, mu).dj_du;
  Mat dc_du = assemble_constraint_derivs(p, u_star, mu).dc_du;
  Vec c = assemble_constraints(p, u_star, mu);
  // dl/du = dj/du - theta' dc/du + tau c' dc/du
  Vec rhs = dj_du.transpose() - dc_du.transpose() * ctx.theta + ctx.tau * dc_du.transpose() * c;
  Eigen::PartialPivLU<Mat> lu(dr_du.transpose());
  Vec lambda = lu.solve(rhs);
  if (!lambda.allFinite()) throw LinearAlgebraError("solve_adjoint: singular Jacobian");
  return lambda;
}

RowVec gradient_from_adjoint(const Problem& p, const Vec& z, const Vec& u, const Vec& mu,
                             const ALContext& ctx) {
  ObjectiveDerivs jd = assemble_objective_derivs(p, u, mu);
  ConstraintDerivs cd = assemble_constraint_derivs(p, u, mu);
  Vec c = assemble_constraints(p, u, mu);
  Mat dr_dmu = assemble_jacobians(p, u, mu).dr_dmu;
  RowVec g_lag = jd.dj_dmu - ctx.theta.transpose() * cd.dc_dmu - z.transpose() * dr_dmu;
  return g_lag + ctx.tau * c.transpose() * cd.dc_dmu;
}

ValueGradient reduced_al_value_gradient(const Problem& p, const Vec& mu, const ALContext& ctx,
                                        const Vec* u_guess, const NewtonOptions& opts) {
  Vec guess = u_guess ? *u_guess : p.initial_state;
  NewtonResult pr = solve_primal(p, mu, guess, opts);
  Vec lambda = solve_adjoint(p, pr.u, mu, ctx);
  ValueGradient vg;
  vg.f = al_value(p, pr.u, mu, ctx);
  vg.grad = gradient_from_adjoint(p, lambda, pr.u, mu, ctx).transpose();
  vg.u_star = pr.u;
  vg.lambda_star = lambda;
  return vg;
}

Mat solve_sensitivity(const Problem& p, const Vec& u_star, const Vec& mu) {
  Jacobians J = assemble_jacobians(p, u_star, mu);
  Eigen::PartialPivLU<Mat> lu(J.dr_du);
  Mat w = lu.solve(-J.dr_dmu);
  if (!w.allFinite()) throw LinearAlgebraError("solve_sensitivity: singular Jacobian");
  return w;
}

}  // namespace eqptr
