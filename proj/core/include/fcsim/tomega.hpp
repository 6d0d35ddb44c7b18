#pragma once

// Gauged T-Omega field element. State x = (t, Psi): cotree line integrals of
// the electric vector potential inside the conductor and the magnetic scalar
// potential on all nodes but the pinned one. With h = P t + S~^T Psi + Y i:
//
//   K_rho t + P^T d/dt b(h)  = 0
//   S~ b(h)                  = 0
//   Y^T d/dt b(h) - v        = 0
//
// where b(h) is the edge flux law (M_mu h for linear materials).

#include "fcsim/element.hpp"
#include "fcsim/field_model.hpp"
#include "fcsim/gauge.hpp"

#include <optional>

namespace fcsim::field {

class TOmegaElement final : public GeneralizedElement {
 public:
  /// Builds the gauge from the model unless `gauge` is given. Throws
  /// GaugeError when the gauge checks fail.
  explicit TOmegaElement(const FitModel& model, std::optional<TOmegaGauge> gauge = std::nullopt);

  Index n_dof() const override { return n_t() + n_psi(); }
  Index n_ports() const override { return y_.cols(); }
  Vec residual(const ElementPoint& p) const override;
  ElementJacobian jacobian(const ElementPoint& p) const override;
  bool is_linear() const override { return law_.is_linear(); }
  std::string describe() const override { return "T-Omega field element"; }

  Index n_t() const { return p_.cols(); }
  Index n_psi() const { return st_t_.cols(); }

  /// Edge field h for state x and port currents i.
  Vec edge_field(const Vec& x, const Vec& i) const;
  /// Scalar potential solving the divergence block for given t and i.
  Vec solve_psi(const Vec& t, const Vec& i) const;

  const SpMat& P() const { return p_; }
  const SpMat& St_t() const { return st_t_; }
  const SpMat& Y() const { return y_; }
  const SpMat& K_rho() const { return k_rho_; }
  const EdgeMaterialLaw& law() const { return law_; }
  const GaugeReport& gauge_report() const { return gauge_report_; }
  Index pinned_node() const { return pinned_; }

 private:
  SpMat p_, st_t_, y_, k_rho_, b_;  // b_ = [P S~^T Y]
  EdgeMaterialLaw law_;
  GaugeReport gauge_report_;
  Index pinned_ = 0;
};

/// Closed form L = Y^T W_P Y with W = M - M S~^T (S~ M S~^T)^{-1} S~ M and
/// W_P = W - W P (P^T W P)^{-1} P^T W, evaluated with the differential
/// permeability at edge field h (zero field when empty).
LLambda l_lambda_tomega(const TOmegaElement& el, const Vec& h = Vec());

}  // namespace fcsim::field
