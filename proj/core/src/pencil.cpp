#include "fcsim/pencil.hpp"

#include <cmath>
#include <limits>

namespace fcsim {

namespace {

// Diagonal equilibration so that every row and column of [E A] has unit
// max-norm (a few alternating sweeps).
void equilibrate(Mat& e, Mat& a) {
  const Index n = e.rows();
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (Index r = 0; r < n; ++r) {
      const double s = std::max(e.row(r).cwiseAbs().maxCoeff(), a.row(r).cwiseAbs().maxCoeff());
      if (s > 0) {
        e.row(r) /= s;
        a.row(r) /= s;
      }
    }
    for (Index c = 0; c < n; ++c) {
      const double s = std::max(e.col(c).cwiseAbs().maxCoeff(), a.col(c).cwiseAbs().maxCoeff());
      if (s > 0) {
        e.col(c) /= s;
        a.col(c) /= s;
      }
    }
  }
}

// Orthonormal kernel basis of m. Relative singular values above 1e-8 count
// as rank and those below a round-off floor as zero; the ones in between are
// split at the widest gap, which separates genuine small couplings from noise.
Mat kernel_by_gap(const Mat& m) {
  const Index n = m.cols();
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Mat::Identity(n, n);
  const double floor = static_cast<double>(n) * 10.0 * std::numeric_limits<double>::epsilon();
  Index sure = 0, above_floor = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-8 * s(0)) ++sure;
    if (s(i) > floor * s(0)) ++above_floor;
  }
  Index rank = sure;
  double widest = 0.0;
  for (Index j = sure; j <= above_floor; ++j) {
    const double below = j < above_floor ? s(j) : floor * s(0);
    const double gap = s(j - 1) / below;
    if (gap > widest) {
      widest = gap;
      rank = j;
    }
  }
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace

int pencil_index(const Mat& e_in, const Mat& a_in) {
  if (e_in.rows() != e_in.cols() || a_in.rows() != a_in.cols() || e_in.rows() != a_in.rows())
    throw std::invalid_argument("pencil matrices must be square and of equal size");
  const Index n = e_in.rows();
  if (n == 0) return 0;
  Mat e = e_in, a = a_in;
  equilibrate(e, a);

  // Shift with the best reciprocal condition number among a few candidates.
  const double shifts[] = {1.0, 0.6180339887, 1.7320508076, 3.1415926536, 0.1, 10.0, 0.01, 100.0};
  double best_rcond = -1.0;
  Mat best;
  for (double l0 : shifts) {
    const Mat m = l0 * e + a;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    const double rc = s(0) > 0 ? s(n - 1) / s(0) : 0.0;
    if (rc > best_rcond) {
      best_rcond = rc;
      best = m;
    }
  }
  if (best_rcond <= static_cast<double>(n) * 1e3 * std::numeric_limits<double>::epsilon())
    throw SingularPencilError("pencil is singular: det(l E + A) vanishes for all probed l");

  const Mat eh = best.partialPivLu().solve(e);
  Mat basis(n, 0);  // orthonormal basis of N_k
  for (int k = 0; k <= n; ++k) {
    const Mat proj = basis.cols() ? Mat(Mat::Identity(n, n) - basis * basis.transpose()) : Mat(Mat::Identity(n, n));
    const Mat next = kernel_by_gap(proj * eh);
    if (next.cols() == basis.cols()) return k;
    basis = next;
  }
  throw SingularPencilError("nilpotency index did not stabilize");
}

std::pair<Mat, Mat> element_pencil(const GeneralizedElement& el, Excitation ex, const ElementPoint& at) {
  const ElementJacobian j = el.jacobian(at);
  const Index nd = el.n_dof(), np = el.n_ports(), m = nd + np;
  Mat e = Mat::Zero(m, m), a = Mat::Zero(m, m);
  e.leftCols(nd) = Mat(j.d_xdot);
  a.leftCols(nd) = Mat(j.d_x);
  if (ex == Excitation::Voltage) {
    e.rightCols(np) = Mat(j.d_idot);
    a.rightCols(np) = Mat(j.d_i);
  } else {
    // v enters undifferentiated; i and di/dt become sources.
    a.rightCols(np) = Mat(j.d_v);
  }
  return {e, a};
}

}  // namespace fcsim
