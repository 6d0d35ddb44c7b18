#pragma once

// Anhysteretic B-H curves. The Brauer-type curve used here is
//
//   f(H) = mu0 H + (mu_r - 1) mu0 H / (1 + |H/H0|^n)^(1/n)
//
// which saturates smoothly with f'(H) = mu0 + (mu_r - 1) mu0 (1 + |H/H0|^n)^(-1-1/n),
// so f' lies between mu0 and mu_r mu0 and tends to mu0 for large fields.

#include "fcsim/field_spec.hpp"

#include <string>
#include <vector>

namespace fcsim::field {

inline constexpr double mu0 = 1.25663706212e-6;

class BHCurve {
 public:
  static BHCurve linear(double mu_r);
  static BHCurve brauer(double mu_r, double h0, double n);
  static BHCurve from_spec(const BHSpec& spec);

  bool is_linear() const { return kind_ == BHSpec::Kind::Linear; }
  double mu_r() const { return mu_r_; }

  double b(double h) const;
  /// Differential permeability dB/dH.
  double db(double h) const;
  double d2b(double h) const;
  /// Inverse curve H(B) and its derivative dH/dB.
  double h(double b) const;
  double dh(double b) const;
  double d2h(double b) const;

 private:
  BHSpec::Kind kind_ = BHSpec::Kind::Linear;
  double mu_r_ = 1.0, h0_ = 1.0, n_ = 2.0;
};

struct BHProbeReport {
  bool zero_at_origin = false;
  bool slope_at_least_mu0 = false;
  bool saturates_to_mu0 = false;
  double worst_slope_ratio = 0.0;   // min over probes of f'(s) / mu0
  double saturation_ratio = 0.0;    // f'(1e7) / mu0
  bool all() const { return zero_at_origin && slope_at_least_mu0 && saturates_to_mu0; }
};

/// Checks f(0) = 0, f' >= mu0 on a log-spaced grid up to 1e9 A/m, and that f'
/// is within 1 % of mu0 at 1e7 A/m.
BHProbeReport probe_bh_curve(const BHCurve& curve);

}  // namespace fcsim::field
