#include "eqptr/burgers.hpp"

#include <cmath>

#include "eqptr/hdm.hpp"

namespace eqptr {

void BurgersConfig::validate() const {
  if (n_cells < 4) throw std::invalid_argument("BurgersConfig: n_cells < 4");
  if (viscosity <= 0) throw std::invalid_argument("BurgersConfig: viscosity <= 0");
  if (n_design < 0) throw std::invalid_argument("BurgersConfig: n_design < 0");
  if (!std::isfinite(design_lower) || !std::isfinite(design_upper) || design_lower > design_upper)
    throw std::invalid_argument("BurgersConfig: invalid design bounds");
  if (target_state.size() != 0 && target_state.size() != n_cells)
    throw std::invalid_argument("BurgersConfig: target_state size mismatch");
}

double burgers_bump(const BurgersConfig& cfg, int p, double x) {
  double xc = (p + 1.0) / (cfg.n_design + 1.0);
  double t = (x - xc) / cfg.bump_width;
  return std::exp(-t * t);
}

namespace {

// Affine representation of the face-neighbor values of a cell:
// value = coef_ue * ue + coef_un . un + constant. Boundary ghosts use
// quadratic extrapolation through the Dirichlet trace so the scheme stays
// consistent at the ends.
struct FaceValue {
  double coef_ue{0};
  Vec coef_un;
  double constant{0};
  double eval(double ue, const Vec& un) const { return coef_ue * ue + coef_un.dot(un) + constant; }
};

struct CellStencil {
  FaceValue left, right;
};

CellStencil stencil_for(const BurgersConfig& cfg, int e, int n_nbr) {
  CellStencil s;
  s.left.coef_un = Vec::Zero(n_nbr);
  s.right.coef_un = Vec::Zero(n_nbr);
  int n = cfg.n_cells;
  if (e == 0) {
    // ghost(-h/2) = 8/3 u_bc - 2 u_0 + 1/3 u_1 (quadratic through the trace)
    s.left.coef_ue = -2.0;
    s.left.coef_un[0] = 1.0 / 3.0;
    s.left.constant = 8.0 / 3.0 * cfg.bc_left;
    s.right.coef_un[0] = 1.0;
  } else if (e == n - 1) {
    s.left.coef_un[0] = 1.0;
    s.right.coef_ue = -2.0;
    s.right.coef_un[0] = 1.0 / 3.0;
    s.right.constant = 8.0 / 3.0 * cfg.bc_right;
  } else {
    s.left.coef_un[0] = 1.0;   // u_{e-1}
    s.right.coef_un[1] = 1.0;  // u_{e+1}
  }
  return s;
}

}  // namespace

Problem make_problem(const BurgersConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_cells;
  const double h = cfg.cell_width();
  const double nu = cfg.viscosity;
  const int n_params = cfg.n_params();
  const int n_c = (cfg.use_equality ? 1 : 0) + (cfg.use_inequality ? 1 : 0);

  Problem p;
  p.n_elements = n;
  p.n_state = n;
  p.n_params = n_params;
  p.n_constraints = n_c;
  p.param_lower = Vec::Constant(n_params, cfg.design_lower);
  p.param_upper = Vec::Constant(n_params, cfg.design_upper);
  if (cfg.use_inequality) {
    p.param_lower[n_params - 1] = 0.0;
    p.param_upper[n_params - 1] = cfg.slack_upper;
  }

  p.elem_dofs.resize(n);
  p.elem_nbr_dofs.resize(n);
  for (int e = 0; e < n; ++e) {
    p.elem_dofs[e] = {e};
    if (e == 0) p.elem_nbr_dofs[e] = {1};
    else if (e == n - 1) p.elem_nbr_dofs[e] = {n - 2};
    else p.elem_nbr_dofs[e] = {e - 1, e + 1};
  }

  p.element_volumes = Vec::Constant(n, h);
  p.initial_state = Vec::Zero(n);
  for (int e = 0; e < n; ++e)
    p.initial_state[e] = cfg.bc_left + (cfg.bc_right - cfg.bc_left) * cfg.cell_center(e);

  auto source = [cfg](int e, const Vec& mu) {
    double s = 0;
    double x = cfg.cell_center(e);
    for (int q = 0; q < cfg.n_design; ++q) s += mu[q] * burgers_bump(cfg, q, x);
    if (cfg.fixed_source) s += cfg.fixed_source(x);
    return s;
  };

  p.residual = [cfg, h, nu, source](int e, const Vec& ue, const Vec& un, const Vec& mu) {
    CellStencil st = stencil_for(cfg, e, (int)un.size());
    double ul = st.left.eval(ue[0], un);
    double ur = st.right.eval(ue[0], un);
    double u = ue[0];
    double conv = ((u * u + ur * ur) - (ul * ul + u * u)) / (4.0 * h);
    double diff = nu * (ur - 2.0 * u + ul) / (h * h);
    Vec r(1);
    r[0] = conv - diff - source(e, mu);
    return r;
  };
  p.residual_du = [cfg, h, nu](int e, const Vec& ue, const Vec& un, const Vec& mu) {
    (void)mu;
    CellStencil st = stencil_for(cfg, e, (int)un.size());
    double ul = st.left.eval(ue[0], un);
    double ur = st.right.eval(ue[0], un);
    Mat d(1, 1);
    d(0, 0) = (ur * st.right.coef_ue - ul * st.left.coef_ue) / (2.0 * h) -
              nu * (st.right.coef_ue - 2.0 + st.left.coef_ue) / (h * h);
    return d;
  };
  p.residual_dun = [cfg, h, nu](int e, const Vec& ue, const Vec& un, const Vec& mu) {
    (void)mu;
    CellStencil st = stencil_for(cfg, e, (int)un.size());
    double ul = st.left.eval(ue[0], un);
    double ur = st.right.eval(ue[0], un);
    Mat d(1, un.size());
    for (int k = 0; k < un.size(); ++k)
      d(0, k) = (ur * st.right.coef_un[k] - ul * st.left.coef_un[k]) / (2.0 * h) -
                nu * (st.right.coef_un[k] + st.left.coef_un[k]) / (h * h);
    return d;
  };
  p.residual_dmu = [cfg, n_params](int e, const Vec&, const Vec&, const Vec&) {
    Mat d = Mat::Zero(1, n_params);
    double x = cfg.cell_center(e);
    for (int q = 0; q < cfg.n_design; ++q) d(0, q) = -burgers_bump(cfg, q, x);
    return d;
  };

  Vec target = cfg.target_state.size() == n ? cfg.target_state : Vec::Zero(n);
  p.objective = [h, target](int e, const Vec& ue, const Vec&) {
    double d = ue[0] - target[e];
    return 0.5 * h * d * d;
  };
  p.objective_du = [h, target](int e, const Vec& ue, const Vec&) {
    RowVec d(1);
    d[0] = h * (ue[0] - target[e]);
    return d;
  };
  p.objective_dmu = [n_params](int, const Vec&, const Vec&) { return RowVec::Zero(n_params); };

  // Equality: c1 = sum_e h u_e - V_eq.  Inequality with slack s (last
  // parameter): c2 = sum_e h u_e^2 - Q_max + s.  Constant terms are spread
  // uniformly over elements so the elemental-sum structure holds.
  const double veq_share = cfg.use_equality ? cfg.volume_rhs / n : 0.0;
  const double qmax_share = cfg.use_inequality ? cfg.quadratic_rhs / n : 0.0;
  const bool eq = cfg.use_equality, ineq = cfg.use_inequality;
  const int slack_idx = n_params - 1;
  p.constraints = [h, n, n_c, eq, ineq, veq_share, qmax_share, slack_idx](int, const Vec& ue,
                                                                          const Vec& mu) {
    Vec c(n_c);
    int i = 0;
    if (eq) c[i++] = h * ue[0] - veq_share;
    if (ineq) c[i] = h * ue[0] * ue[0] - qmax_share + mu[slack_idx] / n;
    return c;
  };
  p.constraints_du = [h, n_c, eq, ineq](int, const Vec& ue, const Vec&) {
    Mat d = Mat::Zero(n_c, 1);
    int i = 0;
    if (eq) d(i++, 0) = h;
    if (ineq) d(i, 0) = 2.0 * h * ue[0];
    return d;
  };
  p.constraints_dmu = [n, n_c, n_params, eq, ineq, slack_idx](int, const Vec&, const Vec&) {
    Mat d = Mat::Zero(n_c, n_params);
    if (ineq) d(n_c - 1, slack_idx) = 1.0 / n;
    (void)eq;
    return d;
  };

  p.validate();
  return p;
}

TargetInfo generate_target(const BurgersConfig& cfg, const Vec& mu_true_design) {
  BurgersConfig plain = cfg;
  plain.use_equality = false;
  plain.use_inequality = false;
  plain.target_state = Vec();
  if (mu_true_design.size() != cfg.n_design)
    throw std::invalid_argument("generate_target: mu_true size mismatch");
  for (int q = 0; q < cfg.n_design; ++q)
    if (mu_true_design[q] < cfg.design_lower || mu_true_design[q] > cfg.design_upper)
      throw std::invalid_argument("generate_target: mu_true outside bounds");
  Problem p = make_problem(plain);
  NewtonResult nr = solve_primal(p, mu_true_design, p.initial_state);
  TargetInfo info;
  info.target_state = nr.u;
  double h = cfg.cell_width();
  info.volume_integral = h * nr.u.sum();
  info.quadratic_integral = h * nr.u.squaredNorm();
  return info;
}

BurgersConfig make_default_testbed(BurgersConfig cfg, const Vec& mu_true_design) {
  TargetInfo info = generate_target(cfg, mu_true_design);
  cfg.target_state = info.target_state;
  cfg.volume_rhs = 0.98 * info.volume_integral;
  cfg.quadratic_rhs = 1.01 * info.quadratic_integral;
  return cfg;
}

Vec default_mu_true(const BurgersConfig& cfg) {
  Vec mu(cfg.n_design);
  for (int q = 0; q < cfg.n_design; ++q)
    mu[q] = 0.6 * std::sin(2.0 * M_PI * (q + 0.5) / std::max(1, cfg.n_design));
  return mu;
}

Vec initial_parameters(const BurgersConfig& cfg) {
  return Vec::Zero(cfg.n_params());
}

}  // namespace eqptr
