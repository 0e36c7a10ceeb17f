#include <doctest.h>

#include "eqptr/hdm.hpp"
#include "toy.hpp"

using namespace eqptr;
using namespace eqptr::testing;

namespace {

// Two elements, disjoint dofs {0,1} / {2,3}, no neighbors.
Problem disjoint_skeleton() {
  Problem p;
  p.n_elements = 2;
  p.n_state = 4;
  p.n_params = 1;
  p.n_constraints = 0;
  p.param_lower = Vec::Constant(1, -1.0);
  p.param_upper = Vec::Constant(1, 1.0);
  p.elem_dofs = {{0, 1}, {2, 3}};
  p.elem_nbr_dofs = {{}, {}};
  p.element_volumes = Vec::Constant(2, 0.5);
  p.initial_state = Vec::Zero(4);
  p.objective = [](int, const Vec&, const Vec&) { return 0.0; };
  p.objective_du = [](int, const Vec& ue, const Vec&) { return RowVec::Zero(ue.size()); };
  p.objective_dmu = [](int, const Vec&, const Vec& mu) { return RowVec::Zero(mu.size()); };
  p.constraints = [](int, const Vec&, const Vec&) { return Vec(); };
  p.constraints_du = [](int, const Vec& ue, const Vec&) { return Mat::Zero(0, ue.size()); };
  p.constraints_dmu = [](int, const Vec&, const Vec& mu) { return Mat::Zero(0, mu.size()); };
  return p;
}

}  // namespace

TEST_CASE("assemble_residual: zero element residual gives zero vector") {
  Problem p = disjoint_skeleton();
  p.residual = [](int, const Vec& ue, const Vec&, const Vec&) { return Vec::Zero(ue.size()).eval(); };
  p.residual_du = [](int, const Vec& ue, const Vec&, const Vec&) {
    return Mat::Zero(ue.size(), ue.size()).eval();
  };
  p.residual_dun = [](int, const Vec& ue, const Vec& un, const Vec&) {
    return Mat::Zero(ue.size(), un.size()).eval();
  };
  p.residual_dmu = [](int, const Vec& ue, const Vec&, const Vec& mu) {
    return Mat::Zero(ue.size(), mu.size()).eval();
  };
  p.validate();
  Vec u = Vec::Random(4), mu = Vec::Zero(1);
  CHECK(assemble_residual(p, u, mu).norm() == 0.0);
  Jacobians J = assemble_jacobians(p, u, mu);
  CHECK(J.dr_du.norm() == 0.0);
  CHECK(J.dr_dmu.norm() == 0.0);
}

TEST_CASE("assemble_residual: disjoint scatter concatenates element residuals") {
  Problem p = disjoint_skeleton();
  Vec r0(2), r1(2);
  r0 << 1.5, -2.0;
  r1 << 0.25, 3.0;
  p.residual = [r0, r1](int e, const Vec&, const Vec&, const Vec&) { return e == 0 ? r0 : r1; };
  p.residual_du = [](int, const Vec& ue, const Vec&, const Vec&) {
    return Mat::Zero(ue.size(), ue.size()).eval();
  };
  p.residual_dun = [](int, const Vec& ue, const Vec& un, const Vec&) {
    return Mat::Zero(ue.size(), un.size()).eval();
  };
  p.residual_dmu = [](int, const Vec& ue, const Vec&, const Vec& mu) {
    return Mat::Zero(ue.size(), mu.size()).eval();
  };
  p.validate();
  Vec r = assemble_residual(p, Vec::Zero(4), Vec::Zero(1));
  Vec expected(4);
  expected << 1.5, -2.0, 0.25, 3.0;
  CHECK(r == expected);
}

TEST_CASE("assemble_residual: dimension mismatch rejected") {
  Problem p = make_toy_problem();
  CHECK_THROWS_AS(assemble_residual(p, Vec::Zero(3), Vec::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(assemble_residual(p, Vec::Zero(5), Vec::Zero(1)), std::invalid_argument);
}

TEST_CASE("assemble_jacobians: linear residual gives state-independent scatter sum") {
  Problem p = disjoint_skeleton();
  Mat A0(2, 2), A1(2, 2);
  A0 << 2, 1, 0, 3;
  A1 << -1, 0.5, 0.5, 4;
  p.residual = [A0, A1](int e, const Vec& ue, const Vec&, const Vec&) {
    return ((e == 0 ? A0 : A1) * ue).eval();
  };
  p.residual_du = [A0, A1](int e, const Vec&, const Vec&, const Vec&) { return e == 0 ? A0 : A1; };
  p.residual_dun = [](int, const Vec& ue, const Vec& un, const Vec&) {
    return Mat::Zero(ue.size(), un.size()).eval();
  };
  p.residual_dmu = [](int, const Vec& ue, const Vec&, const Vec& mu) {
    return Mat::Zero(ue.size(), mu.size()).eval();
  };
  p.validate();
  Mat expected = Mat::Zero(4, 4);
  expected.block(0, 0, 2, 2) = A0;
  expected.block(2, 2, 2, 2) = A1;
  Mat Ja = assemble_jacobians(p, Vec::Random(4), Vec::Zero(1)).dr_du;
  Mat Jb = assemble_jacobians(p, Vec::Random(4), Vec::Zero(1)).dr_du;
  CHECK(Ja == expected);
  CHECK(Jb == expected);
}

TEST_CASE("assemble_jacobians: finite-difference directional check on the toy problem") {
  Problem p = make_toy_problem();
  Vec mu = random_mu(p, 2);
  Vec u(5);
  for (int i = 0; i < 5; ++i) u[i] = 0.3 * det(41, i);
  Jacobians J = assemble_jacobians(p, u, mu);
  const double h = 1e-6;
  for (int dir = 0; dir < 5; ++dir) {
    Vec v = Vec::Zero(5);
    v[dir] = 1.0;
    Vec fd = (assemble_residual(p, u + h * v, mu) - assemble_residual(p, u - h * v, mu)) / (2 * h);
    Vec an = J.dr_du * v;
    CHECK((fd - an).lpNorm<Eigen::Infinity>() <=
          1e-5 * std::max(1.0, an.lpNorm<Eigen::Infinity>()));
  }
  for (int dir = 0; dir < 3; ++dir) {
    Vec v = Vec::Zero(3);
    v[dir] = 1.0;
    Vec fd = (assemble_residual(p, u, mu + h * v) - assemble_residual(p, u, mu - h * v)) / (2 * h);
    Vec an = J.dr_dmu * v;
    CHECK((fd - an).lpNorm<Eigen::Infinity>() <=
          1e-5 * std::max(1.0, an.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("solve_primal: affine system converges in one Newton step") {
  Problem p = disjoint_skeleton();
  Mat K(2, 2);
  K << 3, 1, 1, 2;
  Vec b0(2), b1(2);
  b0 << 1, -1;
  b1 << 0.5, 2;
  p.residual = [K, b0, b1](int e, const Vec& ue, const Vec&, const Vec&) {
    return (K * ue - (e == 0 ? b0 : b1)).eval();
  };
  p.residual_du = [K](int, const Vec&, const Vec&, const Vec&) { return K; };
  p.residual_dun = [](int, const Vec& ue, const Vec& un, const Vec&) {
    return Mat::Zero(ue.size(), un.size()).eval();
  };
  p.residual_dmu = [](int, const Vec& ue, const Vec&, const Vec& mu) {
    return Mat::Zero(ue.size(), mu.size()).eval();
  };
  p.validate();
  NewtonResult nr = solve_primal(p, Vec::Zero(1), Vec::Zero(4));
  CHECK(nr.iters == 1);
  Vec x0 = K.lu().solve(b0), x1 = K.lu().solve(b1);
  CHECK((nr.u.head(2) - x0).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((nr.u.tail(2) - x1).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("solve_primal: toy problem converges; converged guess is a fixed point") {
  Problem p = make_toy_problem();
  Vec mu = random_mu(p, 3);
  NewtonResult nr = solve_primal(p, mu, p.initial_state);
  CHECK(nr.iters <= 50);
  CHECK(nr.residual_norm <= 1e-12);
  CHECK(assemble_residual(p, nr.u, mu).lpNorm<Eigen::Infinity>() <= 1e-12);
  NewtonResult again = solve_primal(p, mu, nr.u);
  CHECK(again.iters == 0);
  CHECK(again.u == nr.u);
}

TEST_CASE("solve_adjoint: zero right-hand side gives zero adjoint") {
  Problem p = make_toy_problem();
  // Remove every u-dependence from objective and constraints.
  p.objective = [](int, const Vec&, const Vec& mu) { return mu[0]; };
  p.objective_du = [](int, const Vec& ue, const Vec&) { return RowVec::Zero(ue.size()).eval(); };
  p.constraints = [](int, const Vec&, const Vec&) { return Vec::Zero(2).eval(); };
  p.constraints_du = [](int, const Vec& ue, const Vec&) { return Mat::Zero(2, ue.size()).eval(); };
  Vec mu = random_mu(p, 4);
  NewtonResult nr = solve_primal(p, mu, p.initial_state);
  Vec lambda = solve_adjoint(p, nr.u, mu, toy_ctx(2));
  CHECK(lambda.lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("solve_adjoint: theta = 0, tau = 0 reduces to the pure-objective adjoint") {
  Problem p = make_toy_problem();
  Vec mu = random_mu(p, 5);
  NewtonResult nr = solve_primal(p, mu, p.initial_state);
  ALContext ctx;
  ctx.theta = Vec::Zero(2);
  ctx.tau = 0.0;
  Vec lambda = solve_adjoint(p, nr.u, mu, ctx);
  Mat J = assemble_jacobians(p, nr.u, mu).dr_du;
  Vec rhs = assemble_objective_derivs(p, nr.u, mu).dj_du.transpose();
  Vec oracle = J.transpose().lu().solve(rhs);
  CHECK((lambda - oracle).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("reduced_al_value_gradient: adjoint gradient matches finite differences") {
  Problem p = make_toy_problem();
  ALContext ctx = toy_ctx(2, 1, 3.0);
  for (int s = 0; s < 3; ++s) {
    Vec mu = random_mu(p, 10 + s);
    ValueGradient vg = reduced_al_value_gradient(p, mu, ctx);
    Vec fd = fd_gradient(
        [&](const Vec& m) {
          return al_value(p, solve_primal(p, m, p.initial_state).u, m, ctx);
        },
        mu);
    double denom = std::max(1.0, fd.lpNorm<Eigen::Infinity>());
    CHECK((vg.grad - fd).lpNorm<Eigen::Infinity>() / denom <= 1e-5);
  }
}

TEST_CASE("reduced_al_value_gradient: degenerate contexts") {
  Problem p = make_toy_problem();
  Vec mu = random_mu(p, 6);
  NewtonResult nr = solve_primal(p, mu, p.initial_state);

  SUBCASE("c == 0 and theta = 0: value is the plain objective") {
    Problem q = p;
    q.constraints = [](int, const Vec&, const Vec&) { return Vec::Zero(2).eval(); };
    q.constraints_du = [](int, const Vec& ue, const Vec&) { return Mat::Zero(2, ue.size()).eval(); };
    q.constraints_dmu = [](int, const Vec&, const Vec& mu_) {
      return Mat::Zero(2, mu_.size()).eval();
    };
    ALContext ctx;
    ctx.theta = Vec::Zero(2);
    ctx.tau = 5.0;
    ValueGradient vg = reduced_al_value_gradient(q, mu, ctx);
    CHECK(vg.f == doctest::Approx(assemble_objective(q, nr.u, mu)).epsilon(1e-12));
  }

  SUBCASE("tau = 0, theta != 0: pure Lagrangian") {
    ALContext ctx = toy_ctx(2, 9, 0.0);
    ValueGradient vg = reduced_al_value_gradient(p, mu, ctx);
    double expect = assemble_objective(p, nr.u, mu) -
                    ctx.theta.dot(assemble_constraints(p, nr.u, mu));
    CHECK(vg.f == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("invariant: assembly is exact under element-order permutation") {
  Problem p = make_toy_problem();
  Problem q = p;
  // Reverse the element order; every callback sees its original element id.
  int ne = p.n_elements;
  q.elem_dofs.clear();
  q.elem_nbr_dofs.clear();
  for (int e = ne - 1; e >= 0; --e) {
    q.elem_dofs.push_back(p.elem_dofs[e]);
    q.elem_nbr_dofs.push_back(p.elem_nbr_dofs[e]);
  }
  auto remap = [ne](int e) { return ne - 1 - e; };
  q.residual = [p, remap](int e, const Vec& a, const Vec& b, const Vec& m) {
    return p.residual(remap(e), a, b, m);
  };
  q.objective = [p, remap](int e, const Vec& a, const Vec& m) {
    return p.objective(remap(e), a, m);
  };
  q.constraints = [p, remap](int e, const Vec& a, const Vec& m) {
    return p.constraints(remap(e), a, m);
  };
  Vec u(5);
  for (int i = 0; i < 5; ++i) u[i] = 0.4 * det(51, i);
  Vec mu = random_mu(p, 7);
  // Scattered residual entries receive at most two contributions each, so the
  // permuted sum is bitwise identical; the constraint sum reassociates four
  // terms and can differ in the last ulp.
  CHECK(assemble_residual(p, u, mu) == assemble_residual(q, u, mu));
  CHECK((assemble_constraints(p, u, mu) - assemble_constraints(q, u, mu))
            .lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("invariant: penalty split and quadratic-penalty gradient identity") {
  Problem p = make_toy_problem();
  for (int s = 0; s < 5; ++s) {
    Vec u(5);
    for (int i = 0; i < 5; ++i) u[i] = 0.5 * det(60 + s, i);
    Vec mu = random_mu(p, 70 + s);
    ALContext ctx = toy_ctx(2, s, 1.0 + s);
    Vec c = assemble_constraints(p, u, mu);
    double lhs = al_value(p, u, mu, ctx) - al_lagrangian(p, u, mu, ctx);
    CHECK(lhs == doctest::Approx(0.5 * ctx.tau * c.squaredNorm()).epsilon(1e-14));

    // g^lambda = g^{L,lambda} + tau c' dc/dmu at a shared multiplier z.
    Vec z(5);
    for (int i = 0; i < 5; ++i) z[i] = 0.3 * det(80 + s, i);
    ALContext lag = ctx;
    lag.tau = 0.0;
    RowVec g_full = gradient_from_adjoint(p, z, u, mu, ctx);
    RowVec g_lag = gradient_from_adjoint(p, z, u, mu, lag);
    RowVec penalty = ctx.tau * c.transpose() * assemble_constraint_derivs(p, u, mu).dc_dmu;
    CHECK((g_full - g_lag - penalty).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}
