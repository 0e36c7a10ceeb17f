#include "eqptr/driver.hpp"

#include <chrono>

namespace eqptr {

RunResult run_optimization(const RunConfig& cfg, const LpDumpSink& lp_dump) {
  cfg.validate();
  RunResult rr;
  rr.config = cfg;

  BurgersConfig tb = make_default_testbed(cfg.testbed, default_mu_true(cfg.testbed));
  Problem problem = make_problem(tb);
  rr.mu0 = initial_parameters(tb);

  auto t0 = std::chrono::steady_clock::now();
  {
    // Starting objective for the S_i normalization (not counted as a solve).
    NewtonResult pr = solve_primal(problem, rr.mu0, problem.initial_state, NewtonOptions{});
    rr.j_initial = assemble_objective(problem, pr.u, rr.mu0);
  }

  BuilderConfig bcfg;
  bcfg.mode = cfg.subsolver();
  bcfg.schedule = cfg.schedule;
  bcfg.preset = cfg.preset;
  bcfg.max_pod = cfg.max_pod;
  bcfg.fd_eps = cfg.fd_eps;

  SnapshotStore carry;
  int major_index = 0;

  SubproblemSolver solver = [&](const Vec& mu_guess, const ALContext& ctx,
                                double omega) -> SubproblemResult {
    BuilderConfig local = bcfg;
    int this_major = major_index++;
    if (lp_dump)
      local.lp_sink = [&, this_major](int build, const TrainingLp& tlp, const EqpWeights& w) {
        lp_dump(this_major, build, tlp, w);
      };
    MajorModelBuilder builder(problem, local, ctx, carry, &rr.counters);
    TrOutcome out = run_trust_region(
        mu_guess, problem.param_lower, problem.param_upper,
        [&](const Vec& mu, double d, double chi) { return builder.build(mu, d, chi); },
        [&](const Vec& mu) { return builder.f_true(mu); }, cfg.trustregion, omega);

    const Vec& u = builder.hdm_state(out.mu);
    SubproblemResult sub;
    sub.mu = out.mu;
    sub.f = al_value(problem, u, out.mu, ctx);
    sub.j = assemble_objective(problem, u, out.mu);
    sub.c = assemble_constraints(problem, u, out.mu);
    sub.chi_inf = out.chi_inf;
    sub.tr_iters = out.n_iters;
    sub.tr_trace = out.trace;

    MajorExtra extra;
    extra.audits = builder.audits();
    extra.cum_hdm = rr.counters.hdm;
    extra.cum_rom = rr.counters.rom;
    extra.cum_eqp = rr.counters.eqp;
    for (const auto& a : extra.audits) {
      extra.usage_min = std::min(extra.usage_min, a.usage);
      extra.usage_max = std::max(extra.usage_max, a.usage);
    }
    if (extra.audits.empty()) extra.usage_min = extra.usage_max = 1.0;
    rr.extras.push_back(std::move(extra));

    // Snapshot inheritance into the next major iteration (trailing columns).
    carry = SnapshotStore{};
    if (cfg.snapshot_inherit > 0) {
      const SnapshotStore& s = builder.store();
      int keep = std::min(cfg.snapshot_inherit, s.count());
      carry.U = s.U.rightCols(keep);
      carry.V = s.V.rightCols(keep);
    }
    return sub;
  };

  try {
    rr.result = run_auglag(rr.mu0, problem.n_constraints, cfg.auglag, solver);
  } catch (const std::exception& ex) {
    rr.failed = true;
    rr.error = ex.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  rr.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  // Extras may outnumber recorded majors if the last subproblem threw.
  rr.extras.resize(std::min(rr.extras.size(), rr.result.majors.size()));
  return rr;
}

double compute_reference_jstar(const RunConfig& cfg) {
  RunConfig ref = cfg;
  ref.method = "hdm";
  ref.auglag.omega_star = 1e-10;
  ref.auglag.max_major_iters = std::max(cfg.auglag.max_major_iters, 40);
  ref.dump_lp = false;
  RunResult rr = run_optimization(ref);
  if (rr.failed || !rr.result.converged)
    throw SolverError("compute_reference_jstar: reference run did not converge");
  return rr.result.j;
}

}  // namespace eqptr
