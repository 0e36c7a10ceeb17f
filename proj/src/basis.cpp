#include "eqptr/basis.hpp"

namespace eqptr {

ReducedBasis gram_schmidt(const std::vector<Vec>& columns, double drop_tol,
                          const std::vector<std::string>* column_tags) {
  if (columns.empty()) throw std::invalid_argument("gram_schmidt: no columns");
  if (column_tags && column_tags->size() != columns.size())
    throw std::invalid_argument("gram_schmidt: tag count mismatch");
  const Eigen::Index n_u = columns.front().size();
  std::vector<Vec> kept;
  std::vector<std::string> kept_tags;
  for (std::size_t ci = 0; ci < columns.size(); ++ci) {
    const Vec& c = columns[ci];
    if (c.size() != n_u) throw std::invalid_argument("gram_schmidt: column size mismatch");
    double norm0 = c.norm();
    if (norm0 == 0.0) continue;
    Vec v = c;
    // Two passes of projection (re-orthogonalization).
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : kept) v -= q.dot(v) * q;
    if (v.norm() < drop_tol * norm0) continue;
    kept.push_back(v / v.norm());
    if (column_tags) kept_tags.push_back((*column_tags)[ci]);
  }
  if (kept.empty()) throw std::invalid_argument("gram_schmidt: all columns degenerate");
  ReducedBasis b;
  b.columns = Mat(n_u, (Eigen::Index)kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) b.columns.col((Eigen::Index)i) = kept[i];
  b.tags = std::move(kept_tags);
  return b;
}

Mat pod(const Mat& snapshots, int k) {
  if (snapshots.cols() < 1) throw std::invalid_argument("pod: empty snapshot matrix");
  if (k <= 0) return Mat(snapshots.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(snapshots, Eigen::ComputeThinU);
  const Vec& sigma = svd.singularValues();
  double smax = sigma.size() > 0 ? sigma[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > 1e-12 * smax) ++rank;
  int keep = std::min(k, rank);
  return svd.matrixU().leftCols(keep);
}

}  // namespace eqptr
