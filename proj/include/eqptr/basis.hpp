#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqptr/types.hpp"

namespace eqptr {

/// Orthonormal reduced basis, optionally around an affine offset state.
struct ReducedBasis {
  Mat columns;                   // N_u x n, Phi' Phi = I
  std::optional<Vec> offset;     // ubar; reconstruction = ubar + Phi y
  std::vector<std::string> tags; // per-column provenance (adjoint/sensitivity/pod-...)
  int size() const { return (int)columns.cols(); }
  int full_dim() const { return (int)columns.rows(); }
  Vec reconstruct(const Vec& y) const {
    Vec u = columns * y;
    if (offset) u += *offset;
    return u;
  }
};

/// Modified Gram-Schmidt with re-orthogonalization. Columns whose residual
/// after projection drops below drop_tol times their original norm are
/// discarded. Throws if every column degenerates. Optional per-column tags
/// follow the surviving columns.
ReducedBasis gram_schmidt(const std::vector<Vec>& columns, double drop_tol = 1e-10,
                          const std::vector<std::string>* column_tags = nullptr);

/// Leading k left singular vectors of the snapshot matrix; singular values
/// below 1e-12 * sigma_max are truncated regardless of k.
Mat pod(const Mat& snapshots, int k);

}  // namespace eqptr
