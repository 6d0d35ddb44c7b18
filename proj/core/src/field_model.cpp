#include "fcsim/field_model.hpp"

#include "fcsim/astar.hpp"
#include "fcsim/bh_curve.hpp"
#include "fcsim/field_suite.hpp"
#include "fcsim/gauge.hpp"
#include "fcsim/tomega.hpp"

#include <random>
#include <sstream>

namespace fcsim::field {

FitModel FitModel::build(const FieldSpec& spec) {
  FitMesh mesh(spec);
  DiscreteOperators ops = build_operators(mesh);
  MaterialMap map = MaterialMap::from_spec(mesh, spec);
  MaterialMatrices mats = build_materials(mesh, map);
  WindingFunctions w = build_windings(mesh, spec);
  return FitModel{spec, std::move(mesh), std::move(ops), std::move(map), std::move(mats), std::move(w)};
}

HelmholtzSplit helmholtz_split(const Vec& x, const DiscreteOperators& ops, const SpMat& st_t, const Vec& mu) {
  const Index ne = st_t.rows(), np = st_t.cols();
  const Mat ct = Mat(SpMat(ops.curl().transpose()));
  Mat a(ne, np + ct.cols());
  a.leftCols(np) = Mat(st_t);
  a.rightCols(ct.cols()) = mu.cwiseInverse().asDiagonal() * ct;
  Vec scale(a.cols());
  for (Index c = 0; c < a.cols(); ++c) {
    const double n = a.col(c).norm();
    scale(c) = n > 0 ? 1.0 / n : 1.0;
  }
  const Mat as = a * scale.asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(as);
  const Vec z = scale.asDiagonal() * cod.solve(x);
  HelmholtzSplit out;
  out.x1 = z.head(np);
  out.x2 = z.tail(ct.cols());
  const double xn = x.norm();
  out.residual = (x - a * z).norm() / (xn > 0 ? xn : 1.0);
  return out;
}

ElementPtr make_field_element(const FitModel& model) {
  if (model.spec.formulation == Formulation::TOmega) return std::make_shared<TOmegaElement>(model);
  return std::make_shared<AStarElement>(model);
}

std::map<std::string, ElementPtr> bind_field_elements(const netlist::NetlistDocument& doc, const std::filesystem::path& base_dir) {
  std::map<std::string, ElementPtr> out;
  for (const auto& br : doc.branches) {
    if (br.kind != netlist::BranchKind::X) continue;
    std::filesystem::path p(br.field_spec);
    if (p.is_relative()) p = base_dir / p;
    const FieldSpec spec = load_field_spec(p);
    if (spec.coils.size() != br.port_count())
      throw FieldSpecError("X branch '" + br.name + "' has " + std::to_string(br.port_count()) + " port(s) but '" + p.string() +
                           "' defines " + std::to_string(spec.coils.size()) + " coil(s)");
    out[br.name] = make_field_element(FitModel::build(spec));
  }
  return out;
}

bool FieldVerifyReport::ok() const {
  for (const auto& i : items)
    if (!i.pass) return false;
  return true;
}

std::string FieldVerifyReport::to_text() const {
  std::ostringstream os;
  for (const auto& i : items) {
    os << (i.pass ? "PASS " : "FAIL ") << i.name;
    if (!i.detail.empty()) os << " (" << i.detail << ")";
    os << '\n';
  }
  os << (ok() ? "all checks passed" : "some checks failed") << '\n';
  return os.str();
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool integer_zero(const SpMatI& m) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMatI::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0) return false;
  return true;
}

Index sparse_rank_dense(const SpMat& m) { return numerical_rank(Mat(m)); }

// Gauge checks read "name: pass (detail)" or "name: fail (detail)".
void add_gauge_check(FieldVerifyReport& rep, const std::string& prefix, const std::string& check) {
  const auto colon = check.find(": ");
  const std::string verdict = check.substr(colon + 2);
  std::string detail;
  if (const auto open = verdict.find('('); open != std::string::npos) detail = verdict.substr(open + 1, verdict.rfind(')') - open - 1);
  rep.items.push_back({prefix + check.substr(0, colon), verdict.rfind("pass", 0) == 0, detail});
}

}  // namespace

FieldVerifyReport verify_field(const FieldSpec& spec) {
  FieldVerifyReport rep;
  auto add = [&](std::string name, bool pass, std::string detail = {}) { rep.items.push_back({std::move(name), pass, std::move(detail)}); };

  FitMesh mesh(spec);
  const DiscreteOperators ops = build_operators(mesh);
  add("mesh counts", true,
      std::to_string(mesh.n_nodes()) + " nodes, " + std::to_string(mesh.n_edges()) + " edges, " + std::to_string(mesh.n_facets()) +
          " facets, " + std::to_string(mesh.n_cells()) + " cells");
  add("C G = 0 (integer)", integer_zero(SpMatI(ops.C * ops.G)));
  add("S C = 0 (integer)", integer_zero(SpMatI(ops.S * ops.C)));

  const MaterialMap map = MaterialMap::from_spec(mesh, spec);
  const MaterialMatrices mats = build_materials(mesh, map);
  add("M_mu positive definite", (mats.mu.array() > 0).all());
  add("M_nu positive definite", (mats.nu.array() > 0).all());
  {
    const auto cond = conducting_facets(mesh, map);
    bool ok = (mats.sigma.array() >= 0).all();
    for (Index f = 0; f < mesh.n_facets(); ++f) ok = ok && ((mats.sigma(f) > 0) == (cond[static_cast<std::size_t>(f)] != 0));
    add("M_sigma semidefinite with kernel on non-conducting facets", ok);
  }
  if (!map.is_linear()) {
    const auto probe = probe_bh_curve(BHCurve::from_spec(spec.bh));
    add("B-H curve f(0) = 0", probe.zero_at_origin);
    add("B-H curve f' >= mu0", probe.slope_at_least_mu0, "min f'/mu0 = " + num(probe.worst_slope_ratio));
    add("B-H curve f' -> mu0", probe.saturates_to_mu0, "f'(1e7)/mu0 = " + num(probe.saturation_ratio));
  }

  WindingFunctions w;
  try {
    w = build_windings(mesh, spec);
    add("coils disjoint from the conductor and from each other", true);
  } catch (const std::exception& e) {
    add("coils disjoint from the conductor and from each other", false, e.what());
    return rep;
  }
  {
    const SpMat div = ops.div() * w.facet_current;
    add("winding currents divergence-free", div.norm() == 0.0);
    const SpMat diff = ops.curl() * w.Y - w.facet_current;
    add("C Y = facet currents", diff.norm() <= 1e-12 * std::max(1.0, w.facet_current.norm()));
    bool disjoint = true;
    for (Index a = 0; a < w.facet_current.cols(); ++a)
      for (Index b = a + 1; b < w.facet_current.cols(); ++b)
        disjoint = disjoint && SpMat(SpMat(w.facet_current.col(a)).cwiseProduct(SpMat(w.facet_current.col(b)))).nonZeros() == 0;
    add("winding supports pairwise disjoint", disjoint);
  }

  FitModel model{spec, mesh, ops, map, mats, w};

  // T-Omega side.
  try {
    const TOmegaGauge g = tomega_gauge(mesh, map);
    add("conductor simply connected", true);
    const SpMat st_t = reduced_dual_divergence_t(ops, g.pinned_node).cast<double>();
    add("C S~^T = 0 (integer)", integer_zero(SpMatI(ops.C * reduced_dual_divergence_t(ops, g.pinned_node))));
    const GaugeReport gr = verify_gauge_tomega(ops, mats, g.selection.P, st_t);
    for (const auto& c : gr.checks) add_gauge_check(rep, "T-Omega gauge: ", c);
    if (w.Y.cols() > 0) {
      const SpMat cy = ops.curl() * w.Y;
      const SpMat cp = ops.curl() * g.selection.P;
      const SpMat both = hstack({&cy, &cp});
      const Index r1 = sparse_rank_dense(cy), r2 = sparse_rank_dense(cp), rb = sparse_rank_dense(both);
      add("source currents independent of conductor currents", rb == r1 + r2 && r1 == cy.cols(),
          "rank [C Y | C P] = " + std::to_string(rb) + ", sum = " + std::to_string(r1 + r2));
    }
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Vec x(mesh.n_edges());
    for (Index k = 0; k < x.size(); ++k) x(k) = nd(rng);
    if (mesh.n_edges() <= 2000) {
      const HelmholtzSplit hs = helmholtz_split(x, ops, st_t, mats.mu);
      add("discrete Helmholtz split", hs.residual <= 1e-10, "relative residual " + num(hs.residual));
    }
    if (w.Y.cols() > 0) {
      const TOmegaElement el(model, g);
      const LLambda l = l_lambda_tomega(el);
      add("T-Omega L_lambda positive definite", l.spd(), "min eigenvalue " + num(l.min_eigenvalue) + " H");
      const InductanceReport ir = verify_inductance_like(el, ElementPoint::zero(el.n_dof(), el.n_ports()));
      const double gap = (ir.L - l.L).norm() / l.L.norm();
      add("T-Omega element is inductance-like", ir.spd && gap <= 1e-8, "extraction vs closed form " + num(gap));
    }
  } catch (const GaugeError& e) {
    add("T-Omega gauge", false, e.what());
  }

  // A* side.
  try {
    const GaugeSelection g = astar_gauge(mesh, map);
    const GaugeReport gr = verify_gauge_astar(ops, mats, g.P);
    for (const auto& c : gr.checks) add_gauge_check(rep, "A* gauge: ", c);
    if (w.Y.cols() > 0 && gr.ok) {
      const AStarElement el(model, g);
      const LLambda l = l_lambda_astar(el);
      add("A* L_lambda positive definite", l.spd(), "min eigenvalue " + num(l.min_eigenvalue) + " H");
      const InductanceReport ir = verify_inductance_like(el, ElementPoint::zero(el.n_dof(), el.n_ports()));
      const double gap = (ir.L - l.L).norm() / l.L.norm();
      add("A* element is inductance-like", ir.spd && gap <= 1e-8, "extraction vs closed form " + num(gap));
    }
  } catch (const GaugeError& e) {
    add("A* gauge", false, e.what());
  }
  return rep;
}

InductanceSummary field_inductance(const FieldSpec& spec) {
  const FitModel model = FitModel::build(spec);
  InductanceSummary s;
  if (spec.formulation == Formulation::TOmega) {
    const TOmegaElement el(model);
    s.closed_form = l_lambda_tomega(el);
    s.extracted = verify_inductance_like(el, ElementPoint::zero(el.n_dof(), el.n_ports())).L;
  } else {
    const AStarElement el(model);
    s.closed_form = l_lambda_astar(el);
    s.extracted = verify_inductance_like(el, ElementPoint::zero(el.n_dof(), el.n_ports())).L;
  }
  s.relative_gap = (s.extracted - s.closed_form.L).norm() / s.closed_form.L.norm();
  return s;
}

}  // namespace fcsim::field
