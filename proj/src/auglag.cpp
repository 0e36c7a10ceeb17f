#include "eqptr/auglag.hpp"

#include <chrono>
#include <cmath>

namespace eqptr {

void AuglagConfig::validate() const {
  if (tau0 <= 0) throw std::invalid_argument("AuglagConfig: tau0 <= 0");
  if (scale_a <= 1) throw std::invalid_argument("AuglagConfig: scale_a <= 1");
  if (pi_star <= 0 || omega_star <= 0)
    throw std::invalid_argument("AuglagConfig: tolerances must be positive");
  if (max_major_iters <= 0) throw std::invalid_argument("AuglagConfig: max_major_iters <= 0");
}

Vec update_multipliers(const Vec& theta, double tau, const Vec& c_value) {
  if (theta.size() != c_value.size())
    throw std::invalid_argument("update_multipliers: size mismatch");
  return theta - tau * c_value;
}

AuglagResult run_auglag(const Vec& mu0, int n_constraints, const AuglagConfig& config,
                        const SubproblemSolver& solve_subproblem) {
  config.validate();
  AuglagResult res;
  ALContext ctx;
  ctx.theta = Vec::Zero(n_constraints);
  ctx.tau = config.tau0;
  double pi = 1.0 / ctx.tau;
  double omega = 1.0 / std::pow(ctx.tau, 0.1);
  Vec mu = mu0;

  for (int i = 0; i < config.max_major_iters; ++i) {
    double omega_i = std::max(omega, config.omega_star);
    auto t0 = std::chrono::steady_clock::now();
    SubproblemResult sub = solve_subproblem(mu, ctx, omega_i);
    auto t1 = std::chrono::steady_clock::now();

    MajorRecord rec;
    rec.i = i;
    rec.theta = ctx.theta;
    rec.tau = ctx.tau;
    rec.pi = pi;
    rec.omega = omega_i;
    rec.mu_star = sub.mu;
    rec.j = sub.j;
    rec.c_inf = sub.c.size() > 0 ? sub.c.lpNorm<Eigen::Infinity>() : 0.0;
    rec.c_2 = sub.c.norm();
    rec.chi_inf = sub.chi_inf;
    rec.tr_iters = sub.tr_iters;
    rec.tr_trace = sub.tr_trace;
    rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    mu = sub.mu;

    if (sub.chi_inf <= config.omega_star && rec.c_2 <= config.pi_star) {
      rec.feasible_branch = true;
      res.majors.push_back(std::move(rec));
      res.converged = true;
      break;
    }

    if (rec.c_2 <= pi) {
      // Feasible branch: first-order multiplier update, keep tau.
      ctx.theta = update_multipliers(ctx.theta, ctx.tau, sub.c);
      pi /= std::pow(ctx.tau, 0.9);
      omega /= ctx.tau;
      rec.feasible_branch = true;
    } else {
      // Infeasible branch: raise the penalty, reset the schedules.
      ctx.tau *= config.scale_a;
      pi = 1.0 / std::pow(ctx.tau, 0.1);
      omega = 1.0 / ctx.tau;
      rec.feasible_branch = false;
    }
    res.majors.push_back(std::move(rec));
  }

  if (!res.majors.empty()) {
    const MajorRecord& last = res.majors.back();
    res.mu = last.mu_star;
    res.j = last.j;
    res.c_inf = last.c_inf;
    res.chi_inf = last.chi_inf;
  } else {
    res.mu = mu0;
  }
  return res;
}

}  // namespace eqptr
