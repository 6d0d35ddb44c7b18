#include "fcsim/astar.hpp"

#include <Eigen/SparseCholesky>

namespace fcsim::field {

AStarElement::AStarElement(const FitModel& model, std::optional<GaugeSelection> gauge) : law_(model.mesh, model.map) {
  const GaugeSelection g = gauge ? *gauge : astar_gauge(model.mesh, model.map);
  p_ = g.P;
  const SpMat pt = p_.transpose();
  ctp_ = SpMat(model.ops.curl().transpose()) * p_;
  m_sigma_ = pt * MaterialMatrices::diag(model.mats.sigma) * p_;
  x_ = pt * model.windings.facet_current;
  gauge_report_ = verify_gauge_astar(model.ops, model.mats, p_);
  if (!gauge_report_.ok) {
    std::string msg = "A* gauge check failed:";
    for (const auto& c : gauge_report_.checks) msg += " " + c + ";";
    throw GaugeError(msg);
  }
}

Vec AStarElement::edge_flux(const Vec& a) const { return ctp_ * a; }

SpMat AStarElement::K_nu(const Vec& b) const {
  const Vec dh = law_.field_derivative(b.size() ? b : Vec(Vec::Zero(ctp_.rows())));
  return SpMat(ctp_.transpose()) * MaterialMatrices::diag(dh) * ctp_;
}

Vec AStarElement::residual(const ElementPoint& pt) const {
  const Index na = n_dof(), ns = n_ports();
  Vec r(n_rows());
  r.head(na) = m_sigma_ * pt.xdot + SpMat(ctp_.transpose()) * law_.field(edge_flux(pt.x)) - x_ * pt.i;
  r.tail(ns) = SpMat(x_.transpose()) * pt.xdot - pt.v;
  return r;
}

ElementJacobian AStarElement::jacobian(const ElementPoint& pt) const {
  const Index na = n_dof(), ns = n_ports();
  auto stack = [&](const SpMat& top, const SpMat& bottom) { return vstack({&top, &bottom}); };
  const SpMat xt = x_.transpose();
  const SpMat k = K_nu(edge_flux(pt.x));
  ElementJacobian j;
  j.d_xdot = stack(m_sigma_, xt);
  j.d_x = stack(k, SpMat(ns, na));
  j.d_idot = SpMat(na + ns, ns);
  j.d_i = stack(SpMat(-x_), SpMat(ns, ns));
  SpMat eye(ns, ns);
  eye.setIdentity();
  j.d_v = stack(SpMat(na, ns), SpMat(-eye));
  return j;
}

void check_winding_assumption(const AStarElement& el) {
  const Mat x = Mat(el.X());
  if (numerical_rank(x) != x.cols()) throw GaugeError("winding matrix X does not have full column rank");
  const double overlap = (el.M_sigma() * el.X()).norm();
  if (overlap > 0.0) throw GaugeError("winding image is not orthogonal to the conductivity matrix (coil touches the conductor)");
}

LLambda l_lambda_astar(const AStarElement& el, const Vec& b) {
  check_winding_assumption(el);
  const Index n = el.n_dof();
  const SpMat k = el.K_nu(b);
  const Vec msd = el.M_sigma().diagonal();
  Vec q(n);
  for (Index r = 0; r < n; ++r) q(r) = msd(r) == 0.0 ? 1.0 : 0.0;
  const SpMat qm = MaterialMatrices::diag(q);
  const SpMat ps = MaterialMatrices::diag(Vec::Ones(n) - q);
  const SpMat a = qm * k * qm + ps;
  Eigen::SimplicialLDLT<SpMat> ldlt(a);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw GaugeError("Q K_nu Q + P^T P is singular (gauge incomplete on the non-conducting region)");
  const Mat qx = Mat(qm * el.X());
  LLambda out;
  out.formulation = "astar";
  out.L = qx.transpose() * ldlt.solve(qx);
  out.L = 0.5 * (out.L + out.L.transpose()).eval();
  out.min_eigenvalue = min_symmetric_eigenvalue(out.L);
  return out;
}

}  // namespace fcsim::field
