#include "eqptr/model_builder.hpp"

#include <cmath>
#include <limits>

namespace eqptr {

Mat SnapshotStore::deviations(const Vec& offset) const {
  Mat D = U;
  for (int c = 0; c < D.cols(); ++c) D.col(c) -= offset;
  return D;
}

void update_snapshots(SnapshotStore& store, const Vec& u_star, const Vec& lambda_star) {
  if (!u_star.allFinite() || !lambda_star.allFinite())
    throw std::invalid_argument("update_snapshots: non-finite snapshot");
  store.U.conservativeResize(u_star.size(), store.U.cols() + 1);
  store.U.col(store.U.cols() - 1) = u_star;
  store.V.conservativeResize(lambda_star.size(), store.V.cols() + 1);
  store.V.col(store.V.cols() - 1) = lambda_star;
}

EqpTolerances schedule_tolerances(const ToleranceSchedule& s, double chi_m_prev, double delta_k,
                                  double tau) {
  if (delta_k <= 0) throw std::invalid_argument("schedule_tolerances: delta_k <= 0");
  if (tau <= 0) throw std::invalid_argument("schedule_tolerances: tau <= 0");
  double bound = (s.kappa_hat / (6.0 * s.kappa)) * std::min(chi_m_prev, delta_k);
  EqpTolerances tol;
  tol.rp = tol.lra = tol.lga = std::max(bound, s.delta_min);
  tol.c = tol.dcmu = tol.dcy = std::max(bound / tau, s.delta_min);
  tol.dv = s.delta_dv;
  tol.lq = s.delta_lq;
  tol.rs = s.delta_rs;
  return tol;
}

MajorModelBuilder::MajorModelBuilder(const Problem& p, const BuilderConfig& config,
                                     const ALContext& ctx, SnapshotStore inherited,
                                     SolveCounters* counters)
    : p_(p), cfg_(config), ctx_(ctx), store_(std::move(inherited)), counters_(counters),
      warm_u_(p.initial_state) {}

const MajorModelBuilder::CachedCenter& MajorModelBuilder::solve_center(const Vec& mu) {
  for (const auto& c : centers_)
    if (c.mu == mu) return c;
  NewtonResult pr = solve_primal(p_, mu, warm_u_, cfg_.newton);
  if (counters_) ++counters_->hdm;
  Vec lambda = solve_adjoint(p_, pr.u, mu, ctx_);
  warm_u_ = pr.u;
  CachedCenter c;
  c.mu = mu;
  c.u_star = pr.u;
  c.lambda_star = lambda;
  centers_.push_back(std::move(c));
  // New center: record its snapshots for later bases (Algorithm 3 step 1).
  update_snapshots(store_, centers_.back().u_star, centers_.back().lambda_star);
  return centers_.back();
}

const Vec& MajorModelBuilder::hdm_state(const Vec& mu) { return solve_center(mu).u_star; }

double MajorModelBuilder::f_true(const Vec& mu) {
  // Acceptance-test evaluation: primal solve only, warm-started.
  NewtonResult pr = solve_primal(p_, mu, warm_u_, cfg_.newton);
  if (counters_) ++counters_->hdm;
  warm_u_ = pr.u;
  return al_value(p_, pr.u, mu, ctx_);
}

Vec MajorModelBuilder::hessvec_fd(const ReducedBasis& basis, const EqpWeights& weights,
                                  const Vec& mu_center, const Vec& grad_center, const Vec& v,
                                  double eps) {
  if (v.norm() <= 1e-15) throw std::invalid_argument("hessvec_fd: zero direction");
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      Vec mu_p = mu_center + eps * v;
      HyperValueGradient vg = hyper_f_and_gradient(p_, basis, weights, mu_p, ctx_, cfg_.newton);
      if (counters_) ++counters_->eqp;
      return (vg.grad - grad_center) / eps;
    } catch (const SolverError&) {
      if (attempt == 1) throw;
      eps /= 10.0;
    }
  }
  throw SolverError("hessvec_fd: unreachable");
}

ModelHandle MajorModelBuilder::build(const Vec& mu, double delta, double chi_m_prev) {
  const CachedCenter& center = solve_center(mu);
  const int n_mu = p_.n_params;

  if (!have_sens0_) {
    // HDM sensitivity at the major's starting point, once (Eq. (44) block).
    sens0_ = solve_sensitivity(p_, center.u_star, mu);
    have_sens0_ = true;
  }

  ModelHandle model;
  model.center = mu;
  model.f_true_center = al_value(p_, center.u_star, mu, ctx_);
  model.grad_true_center =
      gradient_from_adjoint(p_, center.lambda_star, center.u_star, mu, ctx_).transpose();

  if (cfg_.mode == Subsolver::Hdm) {
    // Exact baseline: quadratic model of the true AL function. Hessian columns
    // cost one HDM primal+adjoint each.
    model.f_center = model.f_true_center;
    model.grad_center = model.grad_true_center;
    Mat H(n_mu, n_mu);
    for (int i = 0; i < n_mu; ++i) {
      Vec mu_p = mu;
      mu_p[i] += cfg_.fd_eps;
      ValueGradient vg = reduced_al_value_gradient(p_, mu_p, ctx_, &center.u_star, cfg_.newton);
      if (counters_) ++counters_->hdm;
      H.col(i) = (vg.grad - model.grad_true_center) / cfg_.fd_eps;
    }
    Mat Hs = 0.5 * (H + H.transpose());
    model.hessvec = [Hs](const Vec& v) { return Hs * v; };
    model.basis_size = 0;
    model.eqp_usage = 1.0;
    ++builds_;
    return model;
  }

  // Reduced basis per Eq. (44): affine offset u*(mu_k), columns from the
  // center adjoint, the HDM sensitivity at mu0, and PODs of the snapshot
  // deviations and adjoint snapshots.
  int k = (int)centers_.size() - 1; // trust-region centers visited before this one
  int pq = std::min(k, cfg_.max_pod);
  std::vector<Vec> cols;
  std::vector<std::string> tags;
  cols.push_back(center.lambda_star);
  tags.emplace_back("adjoint");
  for (int i = 0; i < sens0_.cols(); ++i) {
    cols.push_back(sens0_.col(i));
    tags.emplace_back("sensitivity");
  }
  if (pq > 0) {
    Mat Upod = pod(store_.deviations(center.u_star), pq);
    for (int i = 0; i < Upod.cols(); ++i) {
      cols.push_back(Upod.col(i));
      tags.emplace_back("pod-primal");
    }
    Mat Vpod = pod(store_.V, pq);
    for (int i = 0; i < Vpod.cols(); ++i) {
      cols.push_back(Vpod.col(i));
      tags.emplace_back("pod-adjoint");
    }
  }
  ReducedBasis basis = gram_schmidt(cols, 1e-10, &tags);
  basis.offset = center.u_star;

  EqpWeights weights = EqpWeights::ones(p_.n_elements);
  EqpTolerances tol;
  double phi = 0;
  if (cfg_.mode == Subsolver::Eqp) {
    tol = schedule_tolerances(cfg_.schedule, chi_m_prev, delta, ctx_.tau);
    std::vector<TrainingPoint> xi;
    xi.push_back(make_training_point(p_, basis, mu, ctx_, cfg_.newton));
    if (counters_) ++counters_->rom;
    EqpAuditRecord audit;
    audit.build_index = builds_;
    audit.tol = tol;
    audit.basis_size = basis.size();
    try {
      TrainingLp tlp = assemble_training_lp(p_, basis, xi, tol, ctx_, cfg_.preset);
      audit.lp_rows = (int)tlp.rows.size();
      TrainResult tr = train_weights(tlp);
      weights = tr.weights;
      audit.lp_failed = tr.lp_failed;
      audit.usage = weights.usage_fraction();
      audit.worst_violation = audit_weights(tlp, weights);
      if (cfg_.lp_sink) cfg_.lp_sink(builds_, tlp, weights);
    } catch (const std::exception&) {
      weights = EqpWeights::ones(p_.n_elements);
      audit.lp_failed = true;
      audit.usage = 1.0;
    }
    audits_.push_back(audit);
    double k6 = cfg_.schedule.kappa;
    phi = k6 * (tol.rp + tol.lra + tol.lga) + ctx_.tau * k6 * (tol.c + tol.dcy + tol.dcmu);
  }

  HyperValueGradient vg = hyper_f_and_gradient(p_, basis, weights, mu, ctx_, cfg_.newton);
  if (counters_) {
    if (cfg_.mode == Subsolver::Eqp)
      ++counters_->eqp;
    else
      ++counters_->rom;
  }
  model.f_center = vg.f;
  model.grad_center = vg.grad;
  model.phi = phi;
  model.basis_size = basis.size();
  model.eqp_usage = weights.usage_fraction();

  // Dense symmetric Hessian from N_mu FD columns; reused by every
  // Hessian-vector product the trust-region solver makes.
  Mat H(n_mu, n_mu);
  for (int i = 0; i < n_mu; ++i) {
    Vec ei = Vec::Zero(n_mu);
    ei[i] = 1.0;
    H.col(i) = hessvec_fd(basis, weights, mu, model.grad_center, ei, cfg_.fd_eps);
  }
  Mat Hs = 0.5 * (H + H.transpose());
  model.hessvec = [Hs](const Vec& v) { return Hs * v; };
  ++builds_;
  return model;
}

}  // namespace eqptr
