#pragma once

// Per-cell material data and the diagonal FIT material matrices built from it.

#include "fcsim/bh_curve.hpp"
#include "fcsim/fit_mesh.hpp"

namespace fcsim::field {

struct MaterialMap {
  std::vector<double> sigma;    // per cell, S/m
  std::vector<int> curve;       // per cell, index into curves
  std::vector<BHCurve> curves;  // curves[0] is vacuum

  static MaterialMap from_spec(const FitMesh& mesh, const FieldSpec& spec);
  /// Homogeneous linear map, for tests.
  static MaterialMap uniform(const FitMesh& mesh, double mu_r, double sigma = 0.0);

  bool conducting(Index cell) const { return sigma[static_cast<std::size_t>(cell)] > 0.0; }
  double mu(Index cell) const { return curves[static_cast<std::size_t>(curve[static_cast<std::size_t>(cell)])].db(0.0); }
  bool is_linear() const;
};

/// Diagonals of the material matrices at zero field.
///   mu    edges:  sum over adjacent cells of mu_c * (quarter dual area) / edge length
///   nu    edges:  area-weighted mean of 1/mu_c * edge length / dual area
///   sigma facets: length-weighted mean of sigma_c * facet area / dual length
///   rho   facets: length-weighted mean of 1/sigma_c * dual length / facet area,
///                 only on facets whose adjacent cells all conduct (0 elsewhere)
struct MaterialMatrices {
  Vec mu, nu, sigma, rho;

  static SpMat diag(const Vec& d);
};

MaterialMatrices build_materials(const FitMesh& mesh, const MaterialMap& map);

/// Nonlinear constitutive law on edges, cell by cell.
///   T-Omega: flux through the dual facet of edge e from its line integral h_e,
///            b_e = sum_c w_c f_c(h_e / l_e)
///   A*:      line integral along edge e from the flux b_e through its dual facet,
///            h_e = l_e sum_c (w_c / A_e) g_c(b_e / A_e), with g_c the inverse curve
/// where w_c is the quarter dual area contributed by cell c and A_e = sum_c w_c.
class EdgeMaterialLaw {
 public:
  EdgeMaterialLaw(const FitMesh& mesh, const MaterialMap& map);

  bool is_linear() const { return linear_; }
  Index size() const { return static_cast<Index>(length_.size()); }

  Vec flux(const Vec& h) const;
  /// Differential matrix diagonal d b_e / d h_e (the M_mu,d of Newton steps).
  Vec flux_derivative(const Vec& h) const;
  Vec flux_second_derivative(const Vec& h) const;

  Vec field(const Vec& b) const;
  /// Differential reluctivity diagonal d h_e / d b_e.
  Vec field_derivative(const Vec& b) const;

 private:
  struct Part {
    double weight;
    int curve;
  };
  std::vector<std::vector<Part>> parts_;
  std::vector<double> length_, area_;
  std::vector<BHCurve> curves_;
  bool linear_ = true;
};

enum class DifferentialKind { Permeability, Reluctivity };

/// Diagonal differential material matrix at the given edge field (h for
/// permeability, b for reluctivity). Throws on non-finite input.
Vec differential_material(const FitMesh& mesh, const MaterialMap& map, const Vec& field, DifferentialKind kind);

}  // namespace fcsim::field
