#include "eqptr/eqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqptr {

EqpWeights EqpWeights::from_rho(Vec rho, double zero_clamp) {
  EqpWeights w;
  for (int e = 0; e < rho.size(); ++e) {
    if (rho[e] < 0 && rho[e] > -zero_clamp) rho[e] = 0;
    if (rho[e] < 0) throw std::invalid_argument("EqpWeights: negative weight");
    if (rho[e] < zero_clamp) rho[e] = 0;
  }
  w.rho = std::move(rho);
  for (int e = 0; e < w.rho.size(); ++e)
    if (w.rho[e] > 0) w.active_set.push_back(e);
  return w;
}

EqpWeights EqpWeights::ones(int n_elements) {
  EqpWeights w;
  w.rho = Vec::Ones(n_elements);
  w.active_set.resize(n_elements);
  for (int e = 0; e < n_elements; ++e) w.active_set[e] = e;
  return w;
}

namespace {

Mat gather_rows(const Mat& phi, const std::vector<int>& idx) {
  Mat out(idx.size(), phi.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = phi.row(idx[i]);
  return out;
}

void check_inputs(const Problem& p, const ReducedBasis& basis, const EqpWeights& w, const Vec& y,
                  const Vec& mu) {
  if (basis.full_dim() != p.n_state)
    throw std::invalid_argument("eqp: basis/state dimension mismatch");
  if (y.size() != basis.size()) throw std::invalid_argument("eqp: reduced coordinate size mismatch");
  if (mu.size() != p.n_params) throw std::invalid_argument("eqp: parameter size mismatch");
  if (w.rho.size() != p.n_elements) throw std::invalid_argument("eqp: weight vector size mismatch");
  if (!y.allFinite()) throw std::invalid_argument("eqp: non-finite reduced coordinates");
}

/// Per-element contribution to every LP-relevant hyperreduced quantity at
/// frozen inputs. Each field is the coefficient of rho_e, so weighted sums
/// are affine in the weights.
struct ElemContrib {
  Vec r_hat;    // n
  double lq{0};
  Vec c;        // N_c
  Vec lra;      // n
  RowVec lga;   // 1 x N_mu
  Mat dc_dy;    // N_c x n
  Mat dc_dmu;   // N_c x N_mu
  Mat rs;       // n x N_mu
};

// u is the reconstructed full state, v = Phi lambda (may be empty),
// W = Phi sens (may be empty).
ElemContrib elem_contrib(const Problem& p, const ReducedBasis& basis, int e, const Vec& u,
                         const Vec& v, const Mat& W, const Vec& mu, const Vec& theta) {
  const Mat& phi = basis.columns;
  const auto& own = p.elem_dofs[e];
  const auto& nbr = p.elem_nbr_dofs[e];
  Vec ue = p.gather(e, u), un = p.gather_nbr(e, u);
  Mat phi_own = gather_rows(phi, own);
  Mat phi_nbr = gather_rows(phi, nbr);

  ElemContrib ec;
  ec.r_hat = phi_own.transpose() * p.residual(e, ue, un, mu);

  Vec ce = p.n_constraints > 0 ? Vec(p.constraints(e, ue, mu)) : Vec::Zero(0);
  ec.c = ce;
  ec.lq = p.objective(e, ue, mu);
  if (p.n_constraints > 0) ec.lq -= theta.dot(ce);

  Mat dce_du = p.n_constraints > 0 ? Mat(p.constraints_du(e, ue, mu)) : Mat(0, (int)own.size());
  ec.dc_dy = dce_du * phi_own;
  ec.dc_dmu = p.n_constraints > 0 ? Mat(p.constraints_dmu(e, ue, mu)) : Mat(0, p.n_params);

  Mat dre_due = p.residual_du(e, ue, un, mu);
  Mat dre_dun = p.residual_dun(e, ue, un, mu);
  Mat dre_dmu = p.residual_dmu(e, ue, un, mu);

  if (v.size() > 0) {
    Vec ve(own.size());
    for (std::size_t i = 0; i < own.size(); ++i) ve[i] = v[own[i]];
    // Phi' (dr/du)' v, split over owned and neighbor state rows.
    ec.lra = phi_own.transpose() * (dre_due.transpose() * ve) +
             phi_nbr.transpose() * (dre_dun.transpose() * ve);
    RowVec dle_du = p.objective_du(e, ue, mu);
    if (p.n_constraints > 0) dle_du -= theta.transpose() * dce_du;
    ec.lra -= (dle_du * phi_own).transpose();

    ec.lga = p.objective_dmu(e, ue, mu);
    if (p.n_constraints > 0) ec.lga -= theta.transpose() * ec.dc_dmu;
    ec.lga -= ve.transpose() * dre_dmu;
  }

  if (W.size() > 0) {
    Mat We = gather_rows(W, own);
    Mat Wn = gather_rows(W, nbr);
    ec.rs = phi_own.transpose() * (dre_due * We + dre_dun * Wn + dre_dmu);
  }
  return ec;
}

}  // namespace

HyperBundle hyper_evaluate(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                           const Vec& y, const Vec& lambda, const Mat& sens, const Vec& mu,
                           const ALContext& ctx) {
  check_inputs(p, basis, w, y, mu);
  const int n = basis.size();
  const bool want_adj = lambda.size() > 0;
  const bool want_sens = sens.size() > 0;
  Vec u = basis.reconstruct(y);
  Vec v = want_adj ? Vec(basis.columns * lambda) : Vec();
  Mat W = want_sens ? Mat(basis.columns * sens) : Mat();

  HyperBundle b;
  b.r = Vec::Zero(n);
  b.c = Vec::Zero(p.n_constraints);
  b.dc_dy = Mat::Zero(p.n_constraints, n);
  b.dc_dmu = Mat::Zero(p.n_constraints, p.n_params);
  if (want_adj) {
    b.r_lag_adj = Vec::Zero(n);
    b.g_lag_adj = RowVec::Zero(p.n_params);
  }
  if (want_sens) b.sens_res = Mat::Zero(n, p.n_params);

  for (int e : w.active_set) {
    double rho = w.rho[e];
    ElemContrib ec = elem_contrib(p, basis, e, u, v, W, mu, ctx.theta);
    b.r += rho * ec.r_hat;
    b.ell_lag += rho * ec.lq;
    if (p.n_constraints > 0) {
      b.c += rho * ec.c;
      b.dc_dy += rho * ec.dc_dy;
      b.dc_dmu += rho * ec.dc_dmu;
    }
    if (want_adj) {
      b.r_lag_adj += rho * ec.lra;
      b.g_lag_adj += rho * ec.lga;
    }
    if (want_sens) b.sens_res += rho * ec.rs;
  }

  // Penalty terms couple elements through the weighted constraint sum, so
  // they are applied after accumulation (and are not affine in rho).
  b.ell = b.ell_lag + 0.5 * ctx.tau * b.c.squaredNorm();
  if (want_adj) {
    b.r_adj = b.r_lag_adj - ctx.tau * b.dc_dy.transpose() * b.c;
    b.g_adj = b.g_lag_adj + ctx.tau * b.c.transpose() * b.dc_dmu;
  }
  return b;
}

Vec hyper_residual(const Problem& p, const ReducedBasis& basis, const EqpWeights& w, const Vec& y,
                   const Vec& mu) {
  check_inputs(p, basis, w, y, mu);
  Vec u = basis.reconstruct(y);
  Vec r = Vec::Zero(basis.size());
  for (int e : w.active_set) {
    Mat phi_own = gather_rows(basis.columns, p.elem_dofs[e]);
    r += w.rho[e] * (phi_own.transpose() * p.residual(e, p.gather(e, u), p.gather_nbr(e, u), mu));
  }
  return r;
}

namespace {

Mat hyper_jacobian(const Problem& p, const ReducedBasis& basis, const EqpWeights& w, const Vec& y,
                   const Vec& mu) {
  Vec u = basis.reconstruct(y);
  Mat J = Mat::Zero(basis.size(), basis.size());
  for (int e : w.active_set) {
    Vec ue = p.gather(e, u), un = p.gather_nbr(e, u);
    Mat phi_own = gather_rows(basis.columns, p.elem_dofs[e]);
    Mat phi_nbr = gather_rows(basis.columns, p.elem_nbr_dofs[e]);
    J += w.rho[e] * (phi_own.transpose() *
                     (p.residual_du(e, ue, un, mu) * phi_own + p.residual_dun(e, ue, un, mu) * phi_nbr));
  }
  return J;
}

Mat hyper_residual_dmu(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                       const Vec& y, const Vec& mu) {
  Vec u = basis.reconstruct(y);
  Mat d = Mat::Zero(basis.size(), p.n_params);
  for (int e : w.active_set) {
    Mat phi_own = gather_rows(basis.columns, p.elem_dofs[e]);
    d += w.rho[e] *
         (phi_own.transpose() * p.residual_dmu(e, p.gather(e, u), p.gather_nbr(e, u), mu));
  }
  return d;
}

}  // namespace

Vec solve_hyper_primal(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                       const Vec& mu, const NewtonOptions& opts, const Vec* y_guess) {
  if (basis.size() == 0) throw std::invalid_argument("solve_hyper_primal: empty basis");
  Vec y = y_guess ? *y_guess : Vec::Zero(basis.size());
  Vec r = hyper_residual(p, basis, w, y, mu);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (rnorm > opts.tol && it < opts.max_iters) {
    Mat J = hyper_jacobian(p, basis, w, y, mu);
    Vec dy = Eigen::PartialPivLU<Mat>(J).solve(-r);
    if (!dy.allFinite()) throw LinearAlgebraError("solve_hyper_primal: singular Jacobian");
    double alpha = 1.0;
    Vec y_trial;
    double rnorm_trial = rnorm;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      y_trial = y + alpha * dy;
      Vec r_trial = hyper_residual(p, basis, w, y_trial, mu);
      rnorm_trial = r_trial.lpNorm<Eigen::Infinity>();
      if (rnorm_trial < rnorm || rnorm_trial <= opts.tol) {
        r = r_trial;
        break;
      }
      alpha *= 0.5;
    }
    if (rnorm_trial >= rnorm && rnorm_trial > opts.tol)
      throw SolverError("solve_hyper_primal: line search stalled", rnorm);
    y = y_trial;
    rnorm = rnorm_trial;
    ++it;
  }
  if (rnorm > opts.tol) throw SolverError("solve_hyper_primal: Newton did not converge", rnorm);
  return y;
}

Vec solve_hyper_adjoint(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                        const Vec& y, const Vec& mu, const ALContext& ctx) {
  check_inputs(p, basis, w, y, mu);
  Mat J = hyper_jacobian(p, basis, w, y, mu);
  Vec u = basis.reconstruct(y);
  // dl~/dy = sum rho_e (dj_e/du_e - theta' dc_e/du_e) Phi_e + tau c~' dc~/dy
  RowVec dl_dy = RowVec::Zero(basis.size());
  Vec c = Vec::Zero(p.n_constraints);
  Mat dc_dy = Mat::Zero(p.n_constraints, basis.size());
  for (int e : w.active_set) {
    Vec ue = p.gather(e, u);
    Mat phi_own = gather_rows(basis.columns, p.elem_dofs[e]);
    RowVec d = p.objective_du(e, ue, mu) * phi_own;
    if (p.n_constraints > 0) {
      Mat dce = p.constraints_du(e, ue, mu) * phi_own;
      d -= ctx.theta.transpose() * dce;
      dc_dy += w.rho[e] * dce;
      c += w.rho[e] * p.constraints(e, ue, mu);
    }
    dl_dy += w.rho[e] * d;
  }
  dl_dy += ctx.tau * c.transpose() * dc_dy;
  Vec lam = Eigen::PartialPivLU<Mat>(J.transpose()).solve(dl_dy.transpose());
  if (!lam.allFinite()) throw LinearAlgebraError("solve_hyper_adjoint: singular Jacobian");
  return lam;
}

Mat solve_hyper_sensitivity(const Problem& p, const ReducedBasis& basis, const EqpWeights& w,
                            const Vec& y, const Vec& mu) {
  check_inputs(p, basis, w, y, mu);
  Mat J = hyper_jacobian(p, basis, w, y, mu);
  Mat rhs = -hyper_residual_dmu(p, basis, w, y, mu);
  Mat sens = Eigen::PartialPivLU<Mat>(J).solve(rhs);
  if (!sens.allFinite()) throw LinearAlgebraError("solve_hyper_sensitivity: singular Jacobian");
  return sens;
}

HyperValueGradient hyper_f_and_gradient(const Problem& p, const ReducedBasis& basis,
                                        const EqpWeights& w, const Vec& mu, const ALContext& ctx,
                                        const NewtonOptions& opts, const Vec* y_guess) {
  HyperValueGradient out;
  out.y_tilde = solve_hyper_primal(p, basis, w, mu, opts, y_guess);
  out.lambda_tilde = solve_hyper_adjoint(p, basis, w, out.y_tilde, mu, ctx);
  HyperBundle b = hyper_evaluate(p, basis, w, out.y_tilde, out.lambda_tilde, Mat(), mu, ctx);
  out.f = b.ell;
  out.grad = b.g_adj.transpose();
  return out;
}

TrainingPoint make_training_point(const Problem& p, const ReducedBasis& basis, const Vec& mu,
                                  const ALContext& ctx, const NewtonOptions& opts) {
  TrainingPoint tp;
  tp.mu = mu;
  tp.y_hat = solve_reduced_primal(p, basis, mu, opts);
  tp.lambda_hat = solve_reduced_adjoint(p, basis, tp.y_hat, mu, ctx);
  tp.sens_hat = solve_reduced_sensitivity(p, basis, tp.y_hat, mu);
  return tp;
}

namespace {

void push_row(TrainingLp& tlp, const std::string& family, int tp, Vec coeffs, double bound) {
  TrainingLp::Row row;
  row.family = family;
  row.training_point = tp;
  // At large tau the scheduled bounds can drop below the rounding noise of the
  // assembled coefficients, turning the row into an equality the simplex cannot
  // satisfy. Floor at 1e-10, well inside the 1e-9 audit allowance.
  row.bound = std::max(bound, 1e-10);
  row.target = coeffs.sum();
  row.coeffs = std::move(coeffs);
  tlp.rows.push_back(std::move(row));
}

}  // namespace

TrainingLp assemble_training_lp(const Problem& p, const ReducedBasis& basis,
                                const std::vector<TrainingPoint>& training_set,
                                const EqpTolerances& tol, const ALContext& ctx,
                                ConstraintPreset preset) {
  const int ne = p.n_elements;
  const int n = basis.size();
  const bool full = preset == ConstraintPreset::Full;
  const bool with_c = p.n_constraints > 0 && ctx.tau > 0;

  TrainingLp tlp;

  // Domain volume: one row, independent of the training set.
  push_row(tlp, "dv", -1, p.element_volumes, tol.dv);

  for (int t = 0; t < (int)training_set.size(); ++t) {
    const TrainingPoint& tp = training_set[t];
    Vec u = basis.reconstruct(tp.y_hat);
    Vec v = basis.columns * tp.lambda_hat;
    Mat W = full ? Mat(basis.columns * tp.sens_hat) : Mat();

    std::vector<ElemContrib> ec(ne);
    for (int e = 0; e < ne; ++e) ec[e] = elem_contrib(p, basis, e, u, v, W, tp.mu, ctx.theta);

    auto family_rows = [&](const std::string& name, int count, double bound, auto&& entry) {
      for (int i = 0; i < count; ++i) {
        Vec a(ne);
        for (int e = 0; e < ne; ++e) a[e] = entry(ec[e], i);
        push_row(tlp, name, t, std::move(a), bound);
      }
    };

    family_rows("rp", n, tol.rp, [](const ElemContrib& c, int i) { return c.r_hat[i]; });
    family_rows("lra", n, tol.lra, [](const ElemContrib& c, int i) { return c.lra[i]; });
    family_rows("lga", p.n_params, tol.lga, [](const ElemContrib& c, int i) { return c.lga[i]; });
    if (with_c) {
      family_rows("c", p.n_constraints, tol.c / ctx.tau,
                  [](const ElemContrib& c, int i) { return c.c[i]; });
      family_rows("dcmu", p.n_constraints * p.n_params, tol.dcmu / ctx.tau,
                  [&](const ElemContrib& c, int i) {
                    return c.dc_dmu(i / p.n_params, i % p.n_params);
                  });
      family_rows("dcy", p.n_constraints * n, tol.dcy / ctx.tau,
                  [&](const ElemContrib& c, int i) { return c.dc_dy(i / n, i % n); });
    }
    if (full) {
      family_rows("rs", n * p.n_params, tol.rs, [&](const ElemContrib& c, int i) {
        return c.rs(i / p.n_params, i % p.n_params);
      });
      family_rows("lq", 1, tol.lq, [](const ElemContrib& c, int) { return c.lq; });
    }
  }

  // Two-sided rows: a'rho <= b + delta and -a'rho <= -b + delta.
  const int nrows = (int)tlp.rows.size();
  tlp.lp.c = Vec::Ones(ne);
  tlp.lp.A = Mat::Zero(2 * nrows, ne);
  tlp.lp.b = Vec::Zero(2 * nrows);
  for (int i = 0; i < nrows; ++i) {
    tlp.lp.A.row(2 * i) = tlp.rows[i].coeffs.transpose();
    tlp.lp.b[2 * i] = tlp.rows[i].target + tlp.rows[i].bound;
    tlp.lp.A.row(2 * i + 1) = -tlp.rows[i].coeffs.transpose();
    tlp.lp.b[2 * i + 1] = -tlp.rows[i].target + tlp.rows[i].bound;
  }

  // rho = 1 reproduces every target exactly, so it must be feasible.
  Vec ones = Vec::Ones(ne);
  double worst = (tlp.lp.A * ones - tlp.lp.b).maxCoeff();
  if (worst > 1e-9)
    throw std::logic_error("assemble_training_lp: rho = 1 violates an assembled row");
  return tlp;
}

TrainResult train_weights(const TrainingLp& tlp) {
  TrainResult res;
  LpResult lp = solve_lp(tlp.lp);
  res.lp_iterations = lp.iterations;
  if (lp.status != LpStatus::Optimal) {
    res.lp_failed = true;
    res.weights = EqpWeights::ones(tlp.lp.n_vars());
    res.objective = (double)tlp.lp.n_vars();
    return res;
  }
  res.weights = EqpWeights::from_rho(lp.x);
  res.objective = lp.objective;
  return res;
}

double audit_weights(const TrainingLp& tlp, const EqpWeights& w) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : tlp.rows) {
    double resid = std::abs(row.coeffs.dot(w.rho) - row.target);
    worst = std::max(worst, resid - row.bound);
  }
  if (w.rho.minCoeff() < 0) worst = std::max(worst, -w.rho.minCoeff());
  return worst;
}

}  // namespace eqptr
