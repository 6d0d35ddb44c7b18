#include "fcsim/linalg.hpp"

#include <algorithm>
#include <limits>

namespace fcsim {

double rank_threshold(const Vec& singular_values, Index rows, Index cols) {
  if (singular_values.size() == 0) return 0.0;
  const double smax = singular_values.maxCoeff();
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * smax;
}

Index numerical_rank(const Mat& m) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  const double thr = rank_threshold(s, m.rows(), m.cols());
  Index r = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > thr) ++r;
  return r;
}

Mat null_space(const Mat& m, double rel_tol) {
  const Index n = m.cols();
  if (n == 0) return Mat(0, 0);
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double thr = rel_tol * s.maxCoeff();
  Index r = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > thr) ++r;
  return svd.matrixV().rightCols(n - r);
}

Mat null_space(const Mat& m) {
  return null_space(m, static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon());
}

Mat left_null_space(const Mat& m) { return null_space(m.transpose()); }

double min_symmetric_eigenvalue(const Mat& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

SpMat selection_matrix(Index rows, const std::vector<Index>& indices) {
  SpMat p(rows, static_cast<Index>(indices.size()));
  std::vector<Triplet> t;
  t.reserve(indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) t.emplace_back(indices[c], static_cast<Index>(c), 1.0);
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

SpMat vstack(const std::vector<const SpMat*>& blocks) {
  Index rows = 0;
  Index cols = blocks.empty() ? 0 : blocks.front()->cols();
  for (const auto* b : blocks) rows += b->rows();
  std::vector<Triplet> t;
  Index off = 0;
  for (const auto* b : blocks) {
    for (Index k = 0; k < b->outerSize(); ++k)
      for (SpMat::InnerIterator it(*b, k); it; ++it) t.emplace_back(it.row() + off, it.col(), it.value());
    off += b->rows();
  }
  SpMat out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SpMat hstack(const std::vector<const SpMat*>& blocks) {
  Index cols = 0;
  Index rows = blocks.empty() ? 0 : blocks.front()->rows();
  for (const auto* b : blocks) cols += b->cols();
  std::vector<Triplet> t;
  Index off = 0;
  for (const auto* b : blocks) {
    for (Index k = 0; k < b->outerSize(); ++k)
      for (SpMat::InnerIterator it(*b, k); it; ++it) t.emplace_back(it.row(), it.col() + off, it.value());
    off += b->cols();
  }
  SpMat out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace fcsim
