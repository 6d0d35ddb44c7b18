#include "fcsim/bh_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcsim::field {

BHCurve BHCurve::linear(double mu_r) {
  if (!(mu_r > 0)) throw std::invalid_argument("relative permeability must be positive");
  BHCurve c;
  c.kind_ = BHSpec::Kind::Linear;
  c.mu_r_ = mu_r;
  return c;
}

BHCurve BHCurve::brauer(double mu_r, double h0, double n) {
  if (!(mu_r >= 1.0 && h0 > 0.0 && n >= 1.0)) throw std::invalid_argument("Brauer curve needs mu_r >= 1, H0 > 0, n >= 1");
  BHCurve c;
  c.kind_ = BHSpec::Kind::Brauer;
  c.mu_r_ = mu_r;
  c.h0_ = h0;
  c.n_ = n;
  return c;
}

BHCurve BHCurve::from_spec(const BHSpec& spec) {
  return spec.kind == BHSpec::Kind::Linear ? linear(spec.mu_r) : brauer(spec.mu_r, spec.h0, spec.n);
}

double BHCurve::b(double h) const {
  if (is_linear()) return mu_r_ * mu0 * h;
  const double s = 1.0 + std::pow(std::abs(h) / h0_, n_);
  return mu0 * h + (mu_r_ - 1.0) * mu0 * h * std::pow(s, -1.0 / n_);
}

double BHCurve::db(double h) const {
  if (is_linear()) return mu_r_ * mu0;
  const double s = 1.0 + std::pow(std::abs(h) / h0_, n_);
  return mu0 + (mu_r_ - 1.0) * mu0 * std::pow(s, -1.0 - 1.0 / n_);
}

double BHCurve::d2b(double h) const {
  if (is_linear() || h == 0.0) return 0.0;
  const double u = std::abs(h) / h0_;
  const double s = 1.0 + std::pow(u, n_);
  const double sign = h > 0 ? 1.0 : -1.0;
  return -(mu_r_ - 1.0) * mu0 * (n_ + 1.0) * std::pow(u, n_ - 1.0) * sign / h0_ * std::pow(s, -2.0 - 1.0 / n_);
}

double BHCurve::h(double bval) const {
  if (is_linear()) return bval / (mu_r_ * mu0);
  if (bval == 0.0) return 0.0;
  const double target = std::abs(bval);
  // f is odd, increasing and f(H) >= mu0 H, so the root lies in [0, |B|/mu0].
  double lo = 0.0, hi = target / mu0;
  double x = target / (mu_r_ * mu0);
  for (int it = 0; it < 200; ++it) {
    const double r = b(x) - target;
    if (r > 0) hi = x;
    else lo = x;
    if (std::abs(r) <= 1e-15 * target) break;
    double next = x - r / db(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return bval > 0 ? x : -x;
}

double BHCurve::dh(double bval) const { return 1.0 / db(h(bval)); }

double BHCurve::d2h(double bval) const {
  const double hv = h(bval);
  const double d1 = db(hv);
  return -d2b(hv) / (d1 * d1 * d1);
}

BHProbeReport probe_bh_curve(const BHCurve& curve) {
  BHProbeReport r;
  r.zero_at_origin = curve.b(0.0) == 0.0;
  r.worst_slope_ratio = curve.db(0.0) / mu0;
  for (int k = -60; k <= 90; ++k) {
    const double s = std::pow(10.0, k / 10.0);
    r.worst_slope_ratio = std::min({r.worst_slope_ratio, curve.db(s) / mu0, curve.db(-s) / mu0});
  }
  r.slope_at_least_mu0 = r.worst_slope_ratio >= 1.0 - 1e-12;
  r.saturation_ratio = curve.db(1e7) / mu0;
  r.saturates_to_mu0 = std::abs(r.saturation_ratio - 1.0) <= 0.01;
  return r;
}

}  // namespace fcsim::field
