#pragma once

// Gauged A* field element on the dual grid. The magnetic vector potential is
// integrated along dual edges, so its unknowns sit on primal facets; the
// flux b = C^T a lives on primal edges and h(b) is the edge reluctivity law.
//
//   M_sigma da/dt + P^T C h(C^T P a) - X i = 0
//   X^T da/dt - v                          = 0
//
// with X = P^T j_s the gauged facet image of the winding currents.

#include "fcsim/element.hpp"
#include "fcsim/field_model.hpp"
#include "fcsim/gauge.hpp"

#include <optional>

namespace fcsim::field {

class AStarElement final : public GeneralizedElement {
 public:
  explicit AStarElement(const FitModel& model, std::optional<GaugeSelection> gauge = std::nullopt);

  Index n_dof() const override { return p_.cols(); }
  Index n_ports() const override { return x_.cols(); }
  Vec residual(const ElementPoint& p) const override;
  ElementJacobian jacobian(const ElementPoint& p) const override;
  bool is_linear() const override { return law_.is_linear(); }
  std::string describe() const override { return "A* field element"; }

  /// Edge flux b for state a.
  Vec edge_flux(const Vec& a) const;
  /// Curl-curl stiffness on the kept facets at edge flux b (zero flux when empty).
  SpMat K_nu(const Vec& b = Vec()) const;

  const SpMat& P() const { return p_; }
  const SpMat& X() const { return x_; }
  const SpMat& M_sigma() const { return m_sigma_; }
  const SpMat& CtP() const { return ctp_; }
  const EdgeMaterialLaw& law() const { return law_; }
  const GaugeReport& gauge_report() const { return gauge_report_; }

 private:
  SpMat p_, x_, m_sigma_, ctp_;
  EdgeMaterialLaw law_;
  GaugeReport gauge_report_;
};

/// Checks that X has full column rank and that its image is orthogonal to
/// the image of M_sigma. Throws GaugeError with the reason otherwise.
void check_winding_assumption(const AStarElement& el);

/// Closed form L = X^T Q (Q K Q + P_s^T P_s)^{-1} Q X with Q the orthogonal
/// projector onto ker M_sigma and P_s = I - Q.
LLambda l_lambda_astar(const AStarElement& el, const Vec& b = Vec());

}  // namespace fcsim::field
