#include "fcsim/fit_materials.hpp"

#include <cmath>
#include <stdexcept>

namespace fcsim::field {

MaterialMap MaterialMap::from_spec(const FitMesh& mesh, const FieldSpec& spec) {
  MaterialMap m;
  m.curves = {BHCurve::linear(1.0), BHCurve::from_spec(spec.bh)};
  const auto n = static_cast<std::size_t>(mesh.n_cells());
  m.sigma.assign(n, 0.0);
  m.curve.assign(n, 0);
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto p = mesh.cell_ijk(c);
    if (spec.is_conducting(p[0], p[1], p[2])) m.sigma[static_cast<std::size_t>(c)] = spec.sigma;
    if (spec.in_material(p[0], p[1], p[2])) m.curve[static_cast<std::size_t>(c)] = 1;
  }
  return m;
}

MaterialMap MaterialMap::uniform(const FitMesh& mesh, double mu_r, double sigma) {
  MaterialMap m;
  m.curves = {BHCurve::linear(mu_r)};
  m.sigma.assign(static_cast<std::size_t>(mesh.n_cells()), sigma);
  m.curve.assign(static_cast<std::size_t>(mesh.n_cells()), 0);
  return m;
}

bool MaterialMap::is_linear() const {
  for (std::size_t c = 0; c < curve.size(); ++c)
    if (!curves[static_cast<std::size_t>(curve[c])].is_linear()) return false;
  return true;
}

SpMat MaterialMatrices::diag(const Vec& d) {
  SpMat m(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index k = 0; k < d.size(); ++k) t.emplace_back(k, k, d(k));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

MaterialMatrices build_materials(const FitMesh& mesh, const MaterialMap& map) {
  MaterialMatrices mm;
  const Index ne = mesh.n_edges(), nf = mesh.n_facets();
  mm.mu.resize(ne);
  mm.nu.resize(ne);
  for (Index e = 0; e < ne; ++e) {
    const int d = mesh.edge_ijk(e).first;
    const double quarter = 0.25 * mesh.spacing((d + 1) % 3) * mesh.spacing((d + 2) % 3);
    const double len = mesh.edge_length(e);
    const double area = mesh.dual_area(e);
    double mu_sum = 0.0, nu_sum = 0.0;
    for (Index c : mesh.edge_cells(e)) {
      mu_sum += map.mu(c) * quarter;
      nu_sum += quarter / map.mu(c);
    }
    mm.mu(e) = mu_sum / len;
    mm.nu(e) = (nu_sum / area) * len / area;
  }
  mm.sigma.resize(nf);
  mm.rho.resize(nf);
  for (Index f = 0; f < nf; ++f) {
    const int d = mesh.facet_ijk(f).first;
    const double half = 0.5 * mesh.spacing(d);
    const double area = mesh.facet_area(f);
    const double dual = mesh.dual_length(f);
    double sigma_sum = 0.0, rho_sum = 0.0;
    bool all_conducting = true;
    for (Index c : mesh.facet_cells(f)) {
      const double s = map.sigma[static_cast<std::size_t>(c)];
      sigma_sum += s * half;
      if (s > 0) rho_sum += half / s;
      else all_conducting = false;
    }
    mm.sigma(f) = (sigma_sum / dual) * area / dual;
    mm.rho(f) = all_conducting ? (rho_sum / dual) * dual / area : 0.0;
  }
  return mm;
}

EdgeMaterialLaw::EdgeMaterialLaw(const FitMesh& mesh, const MaterialMap& map) : curves_(map.curves) {
  const Index ne = mesh.n_edges();
  parts_.resize(static_cast<std::size_t>(ne));
  length_.resize(static_cast<std::size_t>(ne));
  area_.resize(static_cast<std::size_t>(ne));
  for (Index e = 0; e < ne; ++e) {
    const int d = mesh.edge_ijk(e).first;
    const double quarter = 0.25 * mesh.spacing((d + 1) % 3) * mesh.spacing((d + 2) % 3);
    for (Index c : mesh.edge_cells(e)) parts_[static_cast<std::size_t>(e)].push_back({quarter, map.curve[static_cast<std::size_t>(c)]});
    length_[static_cast<std::size_t>(e)] = mesh.edge_length(e);
    area_[static_cast<std::size_t>(e)] = mesh.dual_area(e);
  }
  linear_ = map.is_linear();
}

Vec EdgeMaterialLaw::flux(const Vec& h) const {
  Vec b(size());
  for (Index e = 0; e < size(); ++e) {
    const double l = length_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (const auto& p : parts_[static_cast<std::size_t>(e)]) s += p.weight * curves_[static_cast<std::size_t>(p.curve)].b(h(e) / l);
    b(e) = s;
  }
  return b;
}

Vec EdgeMaterialLaw::flux_derivative(const Vec& h) const {
  Vec d(size());
  for (Index e = 0; e < size(); ++e) {
    const double l = length_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (const auto& p : parts_[static_cast<std::size_t>(e)]) s += p.weight * curves_[static_cast<std::size_t>(p.curve)].db(h(e) / l);
    d(e) = s / l;
  }
  return d;
}

Vec EdgeMaterialLaw::flux_second_derivative(const Vec& h) const {
  Vec d(size());
  for (Index e = 0; e < size(); ++e) {
    const double l = length_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (const auto& p : parts_[static_cast<std::size_t>(e)]) s += p.weight * curves_[static_cast<std::size_t>(p.curve)].d2b(h(e) / l);
    d(e) = s / (l * l);
  }
  return d;
}

Vec EdgeMaterialLaw::field(const Vec& b) const {
  Vec h(size());
  for (Index e = 0; e < size(); ++e) {
    const double l = length_[static_cast<std::size_t>(e)];
    const double a = area_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (const auto& p : parts_[static_cast<std::size_t>(e)]) s += p.weight / a * curves_[static_cast<std::size_t>(p.curve)].h(b(e) / a);
    h(e) = l * s;
  }
  return h;
}

Vec EdgeMaterialLaw::field_derivative(const Vec& b) const {
  Vec d(size());
  for (Index e = 0; e < size(); ++e) {
    const double l = length_[static_cast<std::size_t>(e)];
    const double a = area_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (const auto& p : parts_[static_cast<std::size_t>(e)]) s += p.weight / a * curves_[static_cast<std::size_t>(p.curve)].dh(b(e) / a);
    d(e) = l * s / a;
  }
  return d;
}

Vec differential_material(const FitMesh& mesh, const MaterialMap& map, const Vec& field, DifferentialKind kind) {
  if (!field.allFinite()) throw std::invalid_argument("non-finite field entries");
  if (field.size() != mesh.n_edges()) throw std::invalid_argument("field vector must have one entry per edge");
  const EdgeMaterialLaw law(mesh, map);
  return kind == DifferentialKind::Permeability ? law.flux_derivative(field) : law.field_derivative(field);
}

}  // namespace fcsim::field
