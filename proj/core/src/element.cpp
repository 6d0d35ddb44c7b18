#include "fcsim/element.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcsim {

namespace {

SpMat dense_to_sparse(const Mat& m) {
  return m.sparseView(0.0, 0.0);
}

}  // namespace

ElementPoint ElementPoint::zero(Index n_dof, Index n_ports, double t) {
  ElementPoint p;
  p.xdot = Vec::Zero(n_dof);
  p.x = Vec::Zero(n_dof);
  p.idot = Vec::Zero(n_ports);
  p.i = Vec::Zero(n_ports);
  p.v = Vec::Zero(n_ports);
  p.t = t;
  return p;
}

LinearInductorElement::LinearInductorElement(Mat inductance) : l_(std::move(inductance)) {
  if (l_.rows() != l_.cols() || l_.rows() == 0) throw ElementError("inductance matrix must be square and non-empty");
  if ((l_ - l_.transpose()).norm() > 1e-12 * l_.norm()) throw ElementError("inductance matrix must be symmetric");
  if (!(min_symmetric_eigenvalue(l_) > 0.0)) throw ElementError("inductance matrix must be positive definite");
}

Vec LinearInductorElement::residual(const ElementPoint& p) const { return l_ * p.idot - p.v; }

ElementJacobian LinearInductorElement::jacobian(const ElementPoint&) const {
  const Index n = l_.rows();
  ElementJacobian j;
  j.d_xdot = SpMat(n, 0);
  j.d_x = SpMat(n, 0);
  j.d_idot = dense_to_sparse(l_);
  j.d_i = SpMat(n, n);
  SpMat eye(n, n);
  eye.setIdentity();
  j.d_v = -eye;
  return j;
}

FluxInductorElement::FluxInductorElement(Index ports, FluxMap phi, FluxDerivative dphi_di)
    : ports_(ports), phi_(std::move(phi)), dphi_(std::move(dphi_di)) {
  if (ports_ <= 0) throw ElementError("flux inductor needs at least one port");
}

Vec FluxInductorElement::residual(const ElementPoint& p) const {
  Vec r(2 * ports_);
  r.head(ports_) = p.xdot - p.v;
  r.tail(ports_) = p.x - phi_(p.i, p.t);
  return r;
}

ElementJacobian FluxInductorElement::jacobian(const ElementPoint& p) const {
  const Index n = ports_;
  Mat zero = Mat::Zero(2 * n, n);
  Mat dxdot = zero, dx = zero, di = zero, dv = zero;
  dxdot.topRows(n).setIdentity();
  dv.topRows(n) = -Mat::Identity(n, n);
  dx.bottomRows(n).setIdentity();
  di.bottomRows(n) = -dphi_(p.i, p.t);
  ElementJacobian j;
  j.d_xdot = dense_to_sparse(dxdot);
  j.d_x = dense_to_sparse(dx);
  j.d_idot = SpMat(2 * n, n);
  j.d_i = dense_to_sparse(di);
  j.d_v = dense_to_sparse(dv);
  return j;
}

InductanceReport verify_inductance_like(const GeneralizedElement& el, const ElementPoint& probe) {
  const Index nd = el.n_dof();
  const Index np = el.n_ports();
  const Index m = nd + np;
  const ElementJacobian j = el.jacobian(probe);

  Mat e(m, m);
  e << Mat(j.d_xdot), Mat(j.d_idot);
  Mat a(m, m);
  a << Mat(j.d_x), Mat(j.d_i);
  const Mat fv = Mat(j.d_v);

  // Column scaling keeps SI field entries and circuit entries comparable.
  Vec scale(m);
  for (Index c = 0; c < m; ++c) {
    const double s = std::max(e.col(c).cwiseAbs().maxCoeff(), a.col(c).cwiseAbs().maxCoeff());
    scale(c) = s > 0.0 ? 1.0 / s : 1.0;
  }
  Vec row_scale(m);
  for (Index k = 0; k < m; ++k) {
    const double s = std::max({(e.row(k) * scale.asDiagonal()).cwiseAbs().maxCoeff(),
                               (a.row(k) * scale.asDiagonal()).cwiseAbs().maxCoeff(),
                               np > 0 ? fv.row(k).cwiseAbs().maxCoeff() : 0.0});
    row_scale(k) = s > 0.0 ? 1.0 / s : 1.0;
  }
  const Mat es = row_scale.asDiagonal() * e * scale.asDiagonal();
  const Mat as = row_scale.asDiagonal() * a * scale.asDiagonal();
  const Mat fvs = row_scale.asDiagonal() * fv;

  Eigen::BDCSVD<Mat> svd(es, Eigen::ComputeFullU);
  const Vec& s = svd.singularValues();
  const double thr = std::max<double>(m, 1) * 1e3 * std::numeric_limits<double>::epsilon() * (s.size() ? s(0) : 0.0);
  Index r = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > thr) ++r;
  const Mat u_r = svd.matrixU().leftCols(r);
  const Mat z = svd.matrixU().rightCols(m - r);

  const double fv_norm = std::max(fvs.norm(), 1e-300);
  if ((z.transpose() * fvs).norm() > 1e-8 * fv_norm)
    throw ElementError("branch voltage enters an algebraic equation; element is not inductance-like at the probe");

  Mat lhs(m, m);
  lhs << u_r.transpose() * es, z.transpose() * as;
  Mat rhs = Mat::Zero(m, np);
  rhs.topRows(r) = -u_r.transpose() * fvs;

  Eigen::FullPivLU<Mat> lu(lhs);
  if (!lu.isInvertible()) throw ElementError("singular extraction system; element is not inductance-like at the probe");
  const Mat dz = scale.asDiagonal() * lu.solve(rhs);
  const Mat didv = dz.bottomRows(np);

  Eigen::FullPivLU<Mat> lu2(didv);
  if (!lu2.isInvertible()) throw ElementError("d(di/dt)/dv is singular");
  InductanceReport rep;
  rep.L = lu2.inverse();
  rep.L = 0.5 * (rep.L + rep.L.transpose()).eval();
  rep.min_eigenvalue = min_symmetric_eigenvalue(rep.L);
  rep.spd = rep.min_eigenvalue > 0.0;
  return rep;
}

ElementJacobian finite_difference_jacobian(const GeneralizedElement& el, const ElementPoint& p, double rel_step) {
  auto column_fd = [&](Vec ElementPoint::*member) {
    const Vec& base = p.*member;
    Mat d(el.n_rows(), base.size());
    for (Index k = 0; k < base.size(); ++k) {
      const double h = rel_step * std::max(1.0, std::abs(base(k)));
      ElementPoint q = p;
      (q.*member)(k) = base(k) + h;
      const Vec fp = el.residual(q);
      (q.*member)(k) = base(k) - h;
      const Vec fm = el.residual(q);
      d.col(k) = (fp - fm) / (2.0 * h);
    }
    return SpMat(d.sparseView(0.0, 0.0));
  };
  ElementJacobian j;
  j.d_xdot = column_fd(&ElementPoint::xdot);
  j.d_idot = column_fd(&ElementPoint::idot);
  j.d_x = column_fd(&ElementPoint::x);
  j.d_i = column_fd(&ElementPoint::i);
  j.d_v = column_fd(&ElementPoint::v);
  return j;
}

}  // namespace fcsim
