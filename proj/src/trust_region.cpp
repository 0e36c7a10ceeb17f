#include "eqptr/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqptr {

void TrConfig::validate() const {
  if (!(0 < gamma1 && gamma1 <= gamma2 && gamma2 <= 1))
    throw std::invalid_argument("TrConfig: need 0 < gamma1 <= gamma2 <= 1");
  if (!(0 < eta1 && eta1 < eta2 && eta2 < 1))
    throw std::invalid_argument("TrConfig: need 0 < eta1 < eta2 < 1");
  if (!(delta_max > 0 && delta0 > 0 && delta0 <= delta_max))
    throw std::invalid_argument("TrConfig: bad radii");
  if (max_iters <= 0) throw std::invalid_argument("TrConfig: max_iters <= 0");
}

double ModelHandle::value(const Vec& mu) const {
  Vec s = mu - center;
  return f_center + grad_center.dot(s) + 0.5 * s.dot(hessvec(s));
}

Vec ModelHandle::gradient(const Vec& mu) const {
  return grad_center + hessvec(mu - center);
}

Vec project_box(const Vec& x, const Vec& lower, const Vec& upper) {
  if (lower.size() != x.size() || upper.size() != x.size())
    throw std::invalid_argument("project_box: size mismatch");
  for (int i = 0; i < x.size(); ++i)
    if (lower[i] > upper[i]) throw std::invalid_argument("project_box: lower > upper");
  return x.cwiseMax(lower).cwiseMin(upper);
}

Vec criticality(const Vec& mu, const Vec& grad, const Vec& lower, const Vec& upper) {
  return project_box(mu - grad, lower, upper) - mu;
}

namespace {

// Enlarged box = box intersected with the inf-norm trust region.
void enlarged_box(const Vec& mu, double delta, const Vec& lower, const Vec& upper, Vec& lo,
                  Vec& up) {
  lo = lower.cwiseMax(mu - Vec::Constant(mu.size(), delta));
  up = upper.cwiseMin(mu + Vec::Constant(mu.size(), delta));
}

}  // namespace

Vec generalized_cauchy_point(const ModelHandle& model, const Vec& mu, double delta,
                             const Vec& lower, const Vec& upper) {
  if (delta <= 0) throw std::invalid_argument("generalized_cauchy_point: delta <= 0");
  const int n = (int)mu.size();
  Vec lo, up;
  enlarged_box(mu, delta, lower, upper, lo, up);
  const Vec g = model.gradient(mu);
  if (g.lpNorm<Eigen::Infinity>() == 0) return mu;

  // Breakpoint of each coordinate along p(t) = P(mu - t g).
  const double inf = std::numeric_limits<double>::infinity();
  Vec tb(n);
  for (int i = 0; i < n; ++i) {
    if (g[i] > 0)
      tb[i] = (mu[i] - lo[i]) / g[i];
    else if (g[i] < 0)
      tb[i] = (mu[i] - up[i]) / g[i];
    else
      tb[i] = inf;
  }

  std::vector<double> bps;
  for (int i = 0; i < n; ++i)
    if (std::isfinite(tb[i]) && tb[i] > 0) bps.push_back(tb[i]);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  bps.push_back(inf);

  Vec p = mu;
  double t_prev = 0;
  for (double t_next : bps) {
    Vec d = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      if (tb[i] > t_prev) d[i] = -g[i];
    if (d.lpNorm<Eigen::Infinity>() == 0) break;

    // Quadratic along p(t) = p + (t - t_prev) d.
    Vec Hd = model.hessvec(d);
    double q1 = model.grad_center.dot(d) + (p - model.center).dot(Hd);
    double q2 = d.dot(Hd);
    if (q1 >= 0) return p;  // first local minimizer reached
    if (q2 > 0) {
      double t_star = t_prev - q1 / q2;
      if (t_star < t_next) return project_box(p + (t_star - t_prev) * d, lo, up);
    }
    if (!std::isfinite(t_next)) break;  // should not happen: all moving coords have breakpoints
    p += (t_next - t_prev) * d;
    // Land exactly on the bound for coordinates whose breakpoint this is.
    for (int i = 0; i < n; ++i)
      if (tb[i] <= t_next) p[i] = g[i] > 0 ? lo[i] : (g[i] < 0 ? up[i] : p[i]);
    p = project_box(p, lo, up);
    t_prev = t_next;
  }
  return p;
}

Vec solve_subproblem(const ModelHandle& model, const Vec& mu, double delta, const Vec& lower,
                     const Vec& upper) {
  const int n = (int)mu.size();
  Vec lo, up;
  enlarged_box(mu, delta, lower, upper, lo, up);
  Vec x = generalized_cauchy_point(model, mu, delta, lower, upper);
  double q_x = model.value(x);

  std::vector<char> active(n, 0);
  auto refresh_active = [&]() {
    for (int i = 0; i < n; ++i)
      if (x[i] <= lo[i] + 1e-14 || x[i] >= up[i] - 1e-14) active[i] = 1;
  };
  refresh_active();

  const int max_cg = 2 * n;
  int iters = 0;
  while (iters < max_cg) {
    // Residual of the quadratic on the free variables.
    Vec r = -(model.grad_center + model.hessvec(x - model.center));
    for (int i = 0; i < n; ++i)
      if (active[i]) r[i] = 0;
    double r0 = r.norm();
    if (r0 == 0) break;
    Vec d = r;
    double rs_old = r.squaredNorm();
    bool restart = false;
    while (iters < max_cg) {
      ++iters;
      Vec Hd = model.hessvec(d);
      for (int i = 0; i < n; ++i)
        if (active[i]) Hd[i] = 0;
      double dHd = d.dot(Hd);
      // Largest step keeping x + alpha d inside the enlarged box.
      double alpha_max = std::numeric_limits<double>::infinity();
      int hit = -1;
      for (int i = 0; i < n; ++i) {
        if (active[i] || d[i] == 0) continue;
        double a = d[i] > 0 ? (up[i] - x[i]) / d[i] : (lo[i] - x[i]) / d[i];
        if (a < alpha_max) { alpha_max = a; hit = i; }
      }
      if (dHd <= 0) {
        // Negative curvature: walk to the boundary (model value decreases).
        if (std::isfinite(alpha_max) && alpha_max > 0) {
          x += alpha_max * d;
          if (hit >= 0) x[hit] = d[hit] > 0 ? up[hit] : lo[hit];
        }
        refresh_active();
        restart = std::isfinite(alpha_max) && alpha_max > 0;
        break;
      }
      double alpha = rs_old / dHd;
      if (alpha >= alpha_max) {
        x += alpha_max * d;
        if (hit >= 0) x[hit] = d[hit] > 0 ? up[hit] : lo[hit];
        refresh_active();
        restart = true;
        break;
      }
      x += alpha * d;
      r -= alpha * Hd;
      for (int i = 0; i < n; ++i)
        if (active[i]) r[i] = 0;
      double rs_new = r.squaredNorm();
      if (std::sqrt(rs_new) <= 1e-8 * r0) break;
      d = r + (rs_new / rs_old) * d;
      rs_old = rs_new;
    }
    if (!restart) break;
  }

  x = project_box(x, lo, up);
  // Never return anything worse than the Cauchy point.
  if (model.value(x) > q_x) return generalized_cauchy_point(model, mu, delta, lower, upper);
  return x;
}

double estimate_hessian_norm(const std::function<Vec(const Vec&)>& hessvec, int dim, int steps) {
  Vec v = Vec::Ones(dim);
  // Deterministic non-uniform perturbation avoids starting orthogonal to the
  // dominant eigenvector in symmetric toy cases.
  for (int i = 0; i < dim; ++i) v[i] += 0.01 * (i + 1);
  v /= v.norm();
  double lambda = 0;
  for (int s = 0; s < steps; ++s) {
    Vec w = hessvec(v);
    double nw = w.norm();
    if (nw == 0 || !w.allFinite()) return lambda;
    lambda = nw;
    v = w / nw;
  }
  return lambda;
}

TrOutcome run_trust_region(const Vec& mu0, const Vec& lower, const Vec& upper,
                           const ModelBuilder& build, const TrueObjective& f_true,
                           const TrConfig& config, double omega) {
  config.validate();
  const double inf = std::numeric_limits<double>::infinity();
  TrOutcome out;
  out.mu = project_box(mu0, lower, upper);
  double delta = config.delta0;
  double chi_m_prev = inf;

  for (int k = 0; k < config.max_iters; ++k) {
    ModelHandle model = build(out.mu, delta, chi_m_prev);

    Vec chi_true = criticality(out.mu, model.grad_true_center, lower, upper);
    Vec chi_m = criticality(out.mu, model.grad_center, lower, upper);
    out.f_true = model.f_true_center;
    out.grad_true = model.grad_true_center;
    out.chi_inf = chi_true.lpNorm<Eigen::Infinity>();
    // Projection non-expansiveness: ||chi_m - chi|| <= ||grad_m - grad||.
    double gap = (chi_m - chi_true).norm() - (model.grad_center - model.grad_true_center).norm();
    out.max_projection_gap_violation = std::max(out.max_projection_gap_violation, gap);

    if (out.chi_inf <= omega) {
      out.converged = true;
      out.n_iters = k;
      return out;
    }

    TrIterRecord rec;
    rec.k = k;
    rec.delta = delta;
    rec.chi_m_inf = chi_m.lpNorm<Eigen::Infinity>();
    rec.chi_m_2 = chi_m.norm();
    rec.chi_true_inf = out.chi_inf;
    rec.f_true_center = model.f_true_center;
    rec.f_model_center = model.f_center;
    rec.basis_size = model.basis_size;
    rec.eqp_usage = model.eqp_usage;
    rec.phi = model.phi;
    rec.beta = 1.0 + estimate_hessian_norm(model.hessvec, (int)out.mu.size());
    rec.fcd_rhs =
        config.kappa_fcd * rec.chi_m_2 * std::min(rec.chi_m_2 / rec.beta, delta);

    Vec cand = solve_subproblem(model, out.mu, delta, lower, upper);
    double pred = model.f_center - model.value(cand);
    rec.pred_decrease = pred;
    chi_m_prev = rec.chi_m_2;

    if (!(pred > 0)) {
      // Zero predicted decrease: failed step, shrink and move on.
      rec.accepted = false;
      rec.rho = 0;
      delta = std::max(config.gamma1 * delta, 1e-16);
      out.trace.push_back(rec);
      out.n_iters = k + 1;
      continue;
    }

    double f_cand = f_true(cand);
    double ared = model.f_true_center - f_cand;
    rec.actual_decrease = ared;
    rec.rho = ared / pred;

    if (rec.rho >= config.eta1) {
      rec.accepted = true;
      out.mu = cand;
    }
    if (rec.rho < config.eta1)
      delta = config.gamma1 * delta;
    else if (rec.rho < config.eta2)
      delta = config.gamma2 * delta;
    else
      delta = std::min(2.0 * delta, config.delta_max);
    out.trace.push_back(rec);
    out.n_iters = k + 1;
  }

  // Final stop-test evaluation at the last center.
  ModelHandle model = build(out.mu, delta, chi_m_prev);
  Vec chi_true = criticality(out.mu, model.grad_true_center, lower, upper);
  out.f_true = model.f_true_center;
  out.grad_true = model.grad_true_center;
  out.chi_inf = chi_true.lpNorm<Eigen::Infinity>();
  out.converged = out.chi_inf <= omega;
  return out;
}

}  // namespace eqptr
