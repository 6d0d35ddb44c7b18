#pragma once

// Contract for inductance-like multi-port devices and the two lumped
// reference implementations.

#include "fcsim/linalg.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace fcsim {

/// Arguments of an element residual. The branch voltage enters only
/// undifferentiated; there is deliberately no slot for dv/dt.
struct ElementPoint {
  Vec xdot, idot, x, i, v;
  double t = 0.0;

  static ElementPoint zero(Index n_dof, Index n_ports, double t = 0.0);
};

/// Partial derivatives of the residual, each with n_dof + n_ports rows.
struct ElementJacobian {
  SpMat d_xdot, d_idot, d_x, d_i, d_v;
};

class ElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeneralizedElement {
 public:
  virtual ~GeneralizedElement() = default;

  virtual Index n_dof() const = 0;
  virtual Index n_ports() const = 0;
  Index n_rows() const { return n_dof() + n_ports(); }

  virtual Vec residual(const ElementPoint& p) const = 0;
  virtual ElementJacobian jacobian(const ElementPoint& p) const = 0;

  /// True when the residual is affine in all arguments (Jacobian constant).
  virtual bool is_linear() const { return false; }
  virtual std::string describe() const = 0;
};

using ElementPtr = std::shared_ptr<const GeneralizedElement>;

/// F = L di/dt - v with a constant SPD inductance matrix.
class LinearInductorElement final : public GeneralizedElement {
 public:
  explicit LinearInductorElement(Mat inductance);
  explicit LinearInductorElement(double inductance) : LinearInductorElement(Mat::Constant(1, 1, inductance)) {}

  Index n_dof() const override { return 0; }
  Index n_ports() const override { return l_.rows(); }
  Vec residual(const ElementPoint& p) const override;
  ElementJacobian jacobian(const ElementPoint& p) const override;
  bool is_linear() const override { return true; }
  std::string describe() const override { return "linear inductor"; }

  const Mat& inductance() const { return l_; }

 private:
  Mat l_;
};

/// Flux-formulated inductor, state x = flux:
///   dx/dt - v = 0
///   x - phi(i, t) = 0
class FluxInductorElement final : public GeneralizedElement {
 public:
  using FluxMap = std::function<Vec(const Vec& i, double t)>;
  using FluxDerivative = std::function<Mat(const Vec& i, double t)>;

  FluxInductorElement(Index ports, FluxMap phi, FluxDerivative dphi_di);

  Index n_dof() const override { return ports_; }
  Index n_ports() const override { return ports_; }
  Vec residual(const ElementPoint& p) const override;
  ElementJacobian jacobian(const ElementPoint& p) const override;
  std::string describe() const override { return "flux inductor"; }

 private:
  Index ports_;
  FluxMap phi_;
  FluxDerivative dphi_;
};

struct InductanceReport {
  Mat L;                    // n_ports x n_ports
  double min_eigenvalue = 0.0;
  bool spd = false;
};

/// Extracts d(di/dt)/dv from the element's own equations at a probe point:
/// the algebraic rows are differentiated once and the stacked system is
/// solved for the rate sensitivities. Throws ElementError when the voltage
/// enters an algebraic row or the stacked system is singular.
InductanceReport verify_inductance_like(const GeneralizedElement& el, const ElementPoint& probe);

/// Central finite-difference Jacobian, for consistency checks.
ElementJacobian finite_difference_jacobian(const GeneralizedElement& el, const ElementPoint& p, double rel_step = 1e-6);

}  // namespace fcsim
