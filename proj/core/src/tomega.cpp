#include "fcsim/tomega.hpp"

#include <Eigen/SparseCholesky>

namespace fcsim::field {

namespace {

SpMat zeros(Index rows, Index cols) { return SpMat(rows, cols); }

}  // namespace

TOmegaElement::TOmegaElement(const FitModel& model, std::optional<TOmegaGauge> gauge) : law_(model.mesh, model.map) {
  const TOmegaGauge g = gauge ? *gauge : tomega_gauge(model.mesh, model.map);
  p_ = g.selection.P;
  pinned_ = g.pinned_node;
  st_t_ = reduced_dual_divergence_t(model.ops, pinned_).cast<double>();
  y_ = model.windings.Y;
  const SpMat cp = model.ops.curl() * p_;
  k_rho_ = SpMat(cp.transpose()) * MaterialMatrices::diag(model.mats.rho) * cp;
  b_ = hstack({&p_, &st_t_, &y_});
  gauge_report_ = verify_gauge_tomega(model.ops, model.mats, p_, st_t_);
  if (!gauge_report_.ok) {
    std::string msg = "T-Omega gauge check failed:";
    for (const auto& c : gauge_report_.checks) msg += " " + c + ";";
    throw GaugeError(msg);
  }
}

Vec TOmegaElement::edge_field(const Vec& x, const Vec& i) const {
  Vec z(x.size() + i.size());
  z << x, i;
  return b_ * z;
}

Vec TOmegaElement::solve_psi(const Vec& t, const Vec& i) const {
  const SpMat s = st_t_.transpose();
  Vec psi = Vec::Zero(n_psi());
  const Vec base = p_ * t + y_ * i;
  for (int it = 0; it < 50; ++it) {
    const Vec h = base + st_t_ * psi;
    const Vec r = s * law_.flux(h);
    const Vec md = law_.flux_derivative(h);
    const SpMat lmu = s * MaterialMatrices::diag(md) * st_t_;
    Eigen::SimplicialLDLT<SpMat> chol(lmu);
    if (chol.info() != Eigen::Success) throw ElementError("singular scalar-potential Laplacian");
    const Vec delta = chol.solve(-r);
    psi += delta;
    if (law_.is_linear() || delta.norm() <= 1e-13 * std::max(1.0, psi.norm())) break;
  }
  return psi;
}

Vec TOmegaElement::residual(const ElementPoint& pt) const {
  const Index nt = n_t(), np = n_psi(), ns = n_ports();
  const Vec h = edge_field(pt.x, pt.i);
  const Vec hd = edge_field(pt.xdot, pt.idot);
  const Vec md = law_.flux_derivative(h);
  const Vec bdot = md.cwiseProduct(hd);
  Vec r(n_rows());
  r.head(nt) = k_rho_ * pt.x.head(nt) + SpMat(p_.transpose()) * bdot;
  r.segment(nt, np) = SpMat(st_t_.transpose()) * law_.flux(h);
  r.tail(ns) = SpMat(y_.transpose()) * bdot - pt.v;
  return r;
}

ElementJacobian TOmegaElement::jacobian(const ElementPoint& pt) const {
  const Index nt = n_t(), np = n_psi(), ns = n_ports(), nd = n_dof();
  const Index ne = b_.rows();
  const Vec h = edge_field(pt.x, pt.i);
  const Vec hd = edge_field(pt.xdot, pt.idot);
  const Vec md = law_.flux_derivative(h);

  const SpMat pt_t = p_.transpose(), s = st_t_.transpose(), yt = y_.transpose();
  const SpMat z_psi = zeros(np, ne), z_t = zeros(nt, ne), z_s = zeros(ns, ne);
  const SpMat r_dot = vstack({&pt_t, &z_psi, &yt});
  const SpMat r_stat = vstack({&z_t, &s, &z_s});

  const SpMat e_full = r_dot * MaterialMatrices::diag(md) * b_;
  SpMat a_full = r_stat * MaterialMatrices::diag(md) * b_;
  if (!law_.is_linear()) a_full += r_dot * MaterialMatrices::diag(law_.flux_second_derivative(h).cwiseProduct(hd)) * b_;
  {
    std::vector<Triplet> t;
    for (Index k = 0; k < k_rho_.outerSize(); ++k)
      for (SpMat::InnerIterator it(k_rho_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    SpMat kb(n_rows(), nd + ns);
    kb.setFromTriplets(t.begin(), t.end());
    a_full += kb;
  }

  ElementJacobian j;
  j.d_xdot = e_full.leftCols(nd);
  j.d_idot = e_full.rightCols(ns);
  j.d_x = a_full.leftCols(nd);
  j.d_i = a_full.rightCols(ns);
  std::vector<Triplet> tv;
  for (Index k = 0; k < ns; ++k) tv.emplace_back(nd + k, k, -1.0);
  j.d_v.resize(n_rows(), ns);
  j.d_v.setFromTriplets(tv.begin(), tv.end());
  return j;
}

LLambda l_lambda_tomega(const TOmegaElement& el, const Vec& h) {
  const Index ne = el.St_t().rows();
  const Vec md = el.law().flux_derivative(h.size() ? h : Vec(Vec::Zero(ne)));
  const SpMat m = MaterialMatrices::diag(md);
  const SpMat s = el.St_t().transpose();
  const SpMat lmu = s * m * el.St_t();
  Eigen::SimplicialLDLT<SpMat> chol(lmu);
  if (chol.info() != Eigen::Success || (chol.vectorD().array() <= 0.0).any())
    throw GaugeError("L_mu = S~ M_mu S~^T is singular (scalar potential not fixed)");

  const SpMat py = hstack({&el.P(), &el.Y()});
  const Mat mx = Mat(m * py);
  const Mat wx = mx - Mat(m * el.St_t()) * chol.solve(Mat(s * mx));  // W [P Y]
  const Mat pyt = Mat(py).transpose();
  const Mat g = pyt * wx;  // [P Y]^T W [P Y]
  const Index nt = el.n_t(), ns = el.n_ports();
  const Mat wpp = g.topLeftCorner(nt, nt);
  const Mat wpy = g.topRightCorner(nt, ns);
  const Mat wyy = g.bottomRightCorner(ns, ns);

  LLambda out;
  out.formulation = "tomega";
  if (nt == 0) {
    out.L = wyy;
  } else {
    Eigen::LDLT<Mat> ldlt(wpp);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
      throw GaugeError("P^T W P is singular (cotree fields contain gradients)");
    out.L = wyy - wpy.transpose() * ldlt.solve(wpy);
  }
  out.L = 0.5 * (out.L + out.L.transpose()).eval();
  out.min_eigenvalue = min_symmetric_eigenvalue(out.L);
  return out;
}

}  // namespace fcsim::field
