#pragma once

#include "eqptr/types.hpp"

namespace eqptr {

/// Dense LP: min c'x  s.t.  A x <= b,  x >= 0.
struct LpInstance {
  Vec c;
  Mat A;
  Vec b;
  int n_vars() const { return (int)c.size(); }
  int n_rows() const { return (int)b.size(); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpResult {
  LpStatus status{LpStatus::IterationLimit};
  Vec x;            // structural variables
  double objective{0};
  Vec dual;         // dual estimate y (<= 0 componentwise for A x <= b rows)
  int iterations{0};
};

/// Two-phase revised primal simplex with Bland's rule engaged after
/// 10 * n_rows iterations. Deterministic: ties break on smallest index.
LpResult solve_lp(const LpInstance& inst);

}  // namespace eqptr
