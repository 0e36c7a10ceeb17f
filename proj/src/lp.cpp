#include "eqptr/lp.hpp"

#include <cmath>
#include <vector>

namespace eqptr {

void LpInstance::validate() const {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw std::invalid_argument("LpInstance: inconsistent dimensions");
  if (!c.allFinite() || !A.allFinite() || !b.allFinite())
    throw std::invalid_argument("LpInstance: non-finite entries");
}

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;

struct Tableau {
  Mat A;             // m x ncols, all columns (structural, slack, artificial)
  Vec b;             // >= 0
  Mat Binv;          // m x m
  std::vector<int> basis;          // column index per row
  std::vector<char> is_artificial; // per column
  Vec xB;
  int m{0}, ncols{0};

  // Returns false when the basis matrix is numerically singular.
  bool refactor() {
    Mat B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
    Mat cand = Eigen::PartialPivLU<Mat>(B).inverse();
    if (!cand.allFinite()) return false;
    Binv = std::move(cand);
    xB = Binv * b;
    // Iterative refinement: on ill-conditioned bases the plain solve leaves
    // residuals well above the feasibility tolerances downstream code expects.
    for (int pass = 0; pass < 2; ++pass) xB += Binv * (b - B * xB);
    return true;
  }
};

// One phase of the simplex on the given cost vector. Returns true if an
// optimal basis was reached within the iteration budget.
bool run_phase(Tableau& t, const Vec& cost, bool bar_artificials, int max_iters, int bland_after,
               int& iter_count) {
  int since_refactor = 0;
  for (;;) {
    if (iter_count >= max_iters) return false;
    // Pricing: y = cB' Binv, reduced costs d_j = c_j - y a_j.
    Vec cB(t.m);
    for (int i = 0; i < t.m; ++i) cB[i] = cost[t.basis[i]];
    RowVec y = cB.transpose() * t.Binv;
    std::vector<char> in_basis(t.ncols, 0);
    for (int i = 0; i < t.m; ++i) in_basis[t.basis[i]] = 1;

    bool use_bland = iter_count >= bland_after;
    int entering = -1;
    double best = -kCostTol;
    for (int j = 0; j < t.ncols; ++j) {
      if (in_basis[j]) continue;
      if (bar_artificials && t.is_artificial[j]) continue;
      double d = cost[j] - y.dot(t.A.col(j));
      if (d < -kCostTol) {
        if (use_bland) { entering = j; break; }
        if (d < best) { best = d; entering = j; }
      }
    }
    if (entering < 0) return true;  // optimal for this phase

    Vec w = t.Binv * t.A.col(entering);
    int leaving = -1;
    double best_ratio = 0;
    for (int i = 0; i < t.m; ++i) {
      if (w[i] > kPivotTol) {
        double ratio = t.xB[i] / w[i];
        if (leaving < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && t.basis[i] < t.basis[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0)
      throw LinearAlgebraError("solve_lp: unbounded phase objective");

    // Eta update of Binv and basic solution.
    double piv = w[leaving];
    RowVec binv_row = t.Binv.row(leaving) / piv;
    for (int i = 0; i < t.m; ++i) {
      if (i == leaving) continue;
      t.Binv.row(i) -= w[i] * binv_row;
    }
    t.Binv.row(leaving) = binv_row;
    double step = best_ratio;
    for (int i = 0; i < t.m; ++i) t.xB[i] -= step * w[i];
    t.xB[leaving] = step;
    t.basis[leaving] = entering;

    ++iter_count;
    if (++since_refactor >= 200) {
      if (!t.refactor()) return false;
      for (int i = 0; i < t.m; ++i) t.xB[i] = std::max(t.xB[i], 0.0);
      since_refactor = 0;
    }
  }
}

// Two-phase simplex on A x <= b, x >= 0, min c'x. The returned solution has
// been recomputed from a fresh factorization and verified against the
// constraints; a result that fails verification is reported as Infeasible so
// the caller can fall back instead of consuming garbage.
LpResult solve_once(const Mat& A, const Vec& b, const Vec& c, bool bland_from_start = false) {
  const int n = (int)A.cols();
  const int m = (int)A.rows();
  LpResult res;

  // Rows with negative rhs are flipped and given an artificial variable so
  // the initial basis matrix is the identity.
  std::vector<int> flipped;
  for (int i = 0; i < m; ++i)
    if (b[i] < 0) flipped.push_back(i);
  const int na = (int)flipped.size();
  const int ncols = n + m + na;

  Tableau t;
  t.m = m;
  t.ncols = ncols;
  t.A = Mat::Zero(m, ncols);
  t.A.leftCols(n) = A;
  for (int i = 0; i < m; ++i) t.A(i, n + i) = 1.0;
  t.b = b;
  t.is_artificial.assign(ncols, 0);
  for (int k = 0; k < na; ++k) {
    int row = flipped[k];
    t.A.row(row) *= -1.0;
    t.b[row] *= -1.0;
    t.A(row, n + m + k) = 1.0;
    t.is_artificial[n + m + k] = 1;
  }
  t.basis.resize(m);
  for (int i = 0; i < m; ++i) t.basis[i] = n + i;
  for (int k = 0; k < na; ++k) t.basis[flipped[k]] = n + m + k;
  t.Binv = Mat::Identity(m, m);
  t.xB = t.b;

  const int max_iters = 50 * (n + m);
  const int bland_after = bland_from_start ? 0 : 10 * m;
  int iters = 0;

  if (na > 0) {
    Vec phase1_cost = Vec::Zero(ncols);
    for (int j = 0; j < ncols; ++j)
      if (t.is_artificial[j]) phase1_cost[j] = 1.0;
    bool done = run_phase(t, phase1_cost, false, max_iters, bland_after, iters);
    if (!done) {
      res.status = LpStatus::IterationLimit;
      res.iterations = iters;
      return res;
    }
    double infeas = 0;
    for (int i = 0; i < m; ++i)
      if (t.is_artificial[t.basis[i]]) infeas += t.xB[i];
    if (infeas > 1e-7) {
      res.status = LpStatus::Infeasible;
      res.iterations = iters;
      return res;
    }
    // Pivot any degenerate artificial out of the basis if possible.
    for (int i = 0; i < m; ++i) {
      if (!t.is_artificial[t.basis[i]]) continue;
      RowVec row = t.Binv.row(i) * t.A.leftCols(n + m);
      int repl = -1;
      for (int j = 0; j < n + m; ++j)
        if (std::abs(row[j]) > 1e-8) { repl = j; break; }
      if (repl >= 0) {
        Vec w = t.Binv * t.A.col(repl);
        double piv = w[i];
        RowVec binv_row = t.Binv.row(i) / piv;
        for (int r = 0; r < m; ++r) {
          if (r == i) continue;
          t.Binv.row(r) -= w[r] * binv_row;
        }
        t.Binv.row(i) = binv_row;
        t.basis[i] = repl;
        t.xB = t.Binv * t.b;
        for (int r = 0; r < m; ++r) t.xB[r] = std::max(t.xB[r], 0.0);
      }
    }
  }

  Vec phase2_cost = Vec::Zero(ncols);
  phase2_cost.head(n) = c;
  bool done = run_phase(t, phase2_cost, true, max_iters, bland_after, iters);
  res.iterations = iters;
  if (!done) {
    res.status = LpStatus::IterationLimit;
    return res;
  }

  // Recompute the basic solution from scratch before reporting: eta-update
  // drift over long degenerate runs can leave xB inconsistent with the basis,
  // and a corrupted "optimum" is worse than an honest failure.
  if (!t.refactor()) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  res.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n && t.xB[i] > 0) res.x[t.basis[i]] = t.xB[i];
  if (!res.x.allFinite() || (A * res.x - b).maxCoeff() > 1e-7) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.objective = c.dot(res.x);
  Vec cB(m);
  for (int i = 0; i < m; ++i) cB[i] = phase2_cost[t.basis[i]];
  Vec y = (cB.transpose() * t.Binv).transpose();
  // Undo the row sign flips so the dual matches the original A x <= b rows.
  for (int k = 0; k < na; ++k) y[flipped[k]] *= -1.0;
  res.dual = y;
  return res;
}

}  // namespace

LpResult solve_lp(const LpInstance& inst) {
  inst.validate();
  const int n = inst.n_vars();
  const int m = inst.n_rows();
  LpResult res;
  if (m == 0) {
    // min c'x over x >= 0: each variable sits at its lower bound.
    res.status = LpStatus::Optimal;
    res.x = Vec::Zero(n);
    res.objective = 0;
    res.dual = Vec();
    return res;
  }

  res = solve_once(inst.A, inst.b, inst.c);
  if (res.status == LpStatus::Optimal) return res;
  int spent = res.iterations;

  // Retry with rows equilibrated to unit inf-norm. Rescaling changes the
  // pivot sequence, which is often enough to get past a degenerate stall on
  // badly scaled instances; the attempts fail on different cases.
  Vec row_scale = Vec::Ones(m);
  Mat As = inst.A;
  Vec bs = inst.b;
  for (int i = 0; i < m; ++i) {
    double s = As.row(i).lpNorm<Eigen::Infinity>();
    if (s > 0) {
      row_scale[i] = 1.0 / s;
      As.row(i) *= row_scale[i];
      bs[i] *= row_scale[i];
    }
  }
  LpResult retry = solve_once(As, bs, inst.c);
  if (retry.status == LpStatus::Optimal) {
    retry.iterations += spent;
    for (int i = 0; i < m; ++i) retry.dual[i] *= row_scale[i];
    return retry;
  }
  spent += retry.iterations;

  // Last resort: Bland's rule from the first iteration. Slower, but its
  // smallest-index pivots take a different path through degenerate vertices.
  retry = solve_once(inst.A, inst.b, inst.c, true);
  retry.iterations += spent;
  return retry;
}

}  // namespace eqptr
