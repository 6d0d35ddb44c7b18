#include "fcsim/bh_curve.hpp"
#include "fcsim/fit_materials.hpp"
#include "fcsim/fit_mesh.hpp"
#include "fcsim/fit_windings.hpp"
#include "fcsim/field_spec.hpp"
#include "fcsim/gauge.hpp"
#include "fcsim/linalg.hpp"

#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace fcsim;
using namespace fcsim::field;
using Catch::Approx;

namespace {

bool integer_zero(const SpMatI& m) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMatI::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("mesh entity counts", "[fit]") {
  const FitMesh one(1, 1, 1);
  CHECK(one.n_nodes() == 8);
  CHECK(one.n_edges() == 12);
  CHECK(one.n_facets() == 6);
  CHECK(one.n_cells() == 1);
  const FitMesh two(2, 2, 2);
  CHECK(two.n_nodes() == 27);
  CHECK(two.n_edges() == 54);
  CHECK(two.n_facets() == 36);
  CHECK(two.n_cells() == 8);
  CHECK_THROWS(FitMesh(0, 1, 1));
  CHECK_THROWS_AS(parse_field_spec("grid.nx = 0\ngrid.ny = 1\ngrid.nz = 1\n"), FieldSpecError);
}

TEST_CASE("index maps are bijective", "[fit]") {
  const FitMesh m(3, 2, 4);
  for (Index e = 0; e < m.n_edges(); ++e) {
    const auto [d, p] = m.edge_ijk(e);
    CHECK(m.edge(d, p[0], p[1], p[2]) == e);
  }
  for (Index f = 0; f < m.n_facets(); ++f) {
    const auto [d, p] = m.facet_ijk(f);
    CHECK(m.facet(d, p[0], p[1], p[2]) == f);
  }
}

TEST_CASE("discrete complex is exact in integer arithmetic", "[fit]") {
  for (int n = 1; n <= 8; ++n) {
    const FitMesh m(n, n, n);
    const DiscreteOperators ops = build_operators(m);
    CHECK(integer_zero(SpMatI(ops.C * ops.G)));
    CHECK(integer_zero(SpMatI(ops.S * ops.C)));
    CHECK(integer_zero(SpMatI(ops.C * reduced_dual_divergence_t(ops, 0))));
  }
  const FitMesh m(3, 4, 2);
  const DiscreteOperators ops = build_operators(m);
  CHECK(integer_zero(SpMatI(ops.C * reduced_dual_divergence_t(ops, 17))));
}

TEST_CASE("single-cell gradient columns are curl free", "[fit]") {
  const FitMesh m(1, 1, 1);
  const DiscreteOperators ops = build_operators(m);
  for (Index n = 0; n < m.n_nodes(); ++n) {
    const SpMatI g = ops.G.col(n);
    CHECK(integer_zero(SpMatI(ops.C * g)));
  }
}

TEST_CASE("reduced dual divergence has full column rank", "[fit]") {
  const FitMesh m(4, 4, 4);
  const DiscreteOperators ops = build_operators(m);
  const SpMatI st = reduced_dual_divergence_t(ops, 0);
  CHECK(st.cols() == m.n_nodes() - 1);
  CHECK(numerical_rank(Mat(st.cast<double>())) == st.cols());
}

TEST_CASE("homogeneous material matrices", "[fit]") {
  const FitMesh m(3, 3, 3, 0.1, 0.2, 0.3);
  const MaterialMatrices mats = build_materials(m, MaterialMap::uniform(m, 1.0));
  for (Index e = 0; e < m.n_edges(); ++e) {
    CHECK(mats.mu(e) == Approx(mu0 * m.dual_area(e) / m.edge_length(e)).epsilon(1e-13));
    CHECK(mats.nu(e) * mats.mu(e) == Approx(1.0).epsilon(1e-13));
  }
  CHECK(mats.sigma.norm() == 0.0);
  CHECK(mats.rho.norm() == 0.0);
}

TEST_CASE("interface edges take the area-weighted arithmetic mean", "[fit]") {
  // Two cells side by side along x; left mu_r = 1, right mu_r = 3.
  FitMesh m(2, 1, 1);
  MaterialMap map = MaterialMap::uniform(m, 1.0);
  map.curves.push_back(BHCurve::linear(3.0));
  map.curve[static_cast<std::size_t>(m.cell(1, 0, 0))] = 1;
  const MaterialMatrices mats = build_materials(m, map);
  // y-edge on the shared face x = 1: one quarter of its dual facet in each cell.
  const Index e = m.edge(1, 1, 0, 0);
  const double quarter = 0.25;
  const double expected = (mu0 * quarter + 3 * mu0 * quarter) / 1.0;
  CHECK(mats.mu(e) == Approx(expected).epsilon(1e-13));
  CHECK(m.dual_area(e) == Approx(0.5));
}

TEST_CASE("conductivity averages along the dual edge", "[fit]") {
  FitMesh m(2, 1, 1, 0.1, 0.1, 0.1);
  MaterialMap map = MaterialMap::uniform(m, 1.0);
  map.sigma[static_cast<std::size_t>(m.cell(0, 0, 0))] = 2e6;
  const MaterialMatrices mats = build_materials(m, map);
  const double area = 0.01, h = 0.1;
  // Shared x-facet: half of the dual edge inside the conductor.
  CHECK(mats.sigma(m.facet(0, 1, 0, 0)) == Approx(2e6 * (h / 2) / h * area / h).epsilon(1e-13));
  // Outer x-facet of the conducting cell: its dual edge is a half edge.
  CHECK(mats.sigma(m.facet(0, 0, 0, 0)) == Approx(2e6 * (h / 2) / (h / 2) * area / (h / 2)).epsilon(1e-13));
  // Facets of the air cell away from the conductor carry nothing.
  CHECK(mats.sigma(m.facet(0, 2, 0, 0)) == 0.0);
  // Resistivity only where every adjacent cell conducts.
  CHECK(mats.rho(m.facet(0, 0, 0, 0)) > 0.0);
  CHECK(mats.rho(m.facet(0, 1, 0, 0)) == 0.0);
  const auto cond = conducting_facets(m, map);
  for (Index f = 0; f < m.n_facets(); ++f) CHECK((mats.sigma(f) > 0) == (cond[static_cast<std::size_t>(f)] != 0));
}

TEST_CASE("winding functions", "[fit]") {
  const FieldSpec spec = parse_field_spec(
      "grid.nx = 4\ngrid.ny = 4\ngrid.nz = 4\n"
      "coil.1.frame = z,0,1,0,0,3,3,1\ncoil.1.turns = 1000\n"
      "coil.2.frame = z,3,3,0,0,3,3,1\ncoil.2.turns = 10\n");
  const FitMesh m(spec);
  const DiscreteOperators ops = build_operators(m);
  const WindingFunctions w = build_windings(m, spec);
  REQUIRE(w.n_coils() == 2);

  SECTION("divergence free and generated by Y") {
    CHECK(SpMat(ops.div() * w.facet_current).norm() == 0.0);
    CHECK(SpMat(ops.div() * (ops.curl() * w.Y)).norm() == 0.0);
    CHECK(SpMat(ops.curl() * w.Y - w.facet_current).norm() == 0.0);
  }
  SECTION("disjoint supports") {
    const SpMat overlap = SpMat(w.facet_current.col(0)).cwiseProduct(SpMat(w.facet_current.col(1)));
    CHECK(overlap.nonZeros() == 0);
  }
  SECTION("a half-plane cut carries the turn count") {
    for (int coil = 0; coil < 2; ++coil) {
      double through = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 4; ++k) through += w.facet_current.coeff(m.facet(0, 2, j, k), coil);
      CHECK(through == Approx(coil == 0 ? 1000.0 : 10.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("coils touching the conductor or each other are rejected", "[fit]") {
  const std::string grid = "grid.nx = 4\ngrid.ny = 4\ngrid.nz = 4\n";
  CHECK_THROWS_AS(build_windings(FitMesh(4, 4, 4), parse_field_spec(grid + "conductor.box = 0,0,0,1,1,1\nconductor.sigma = 1\n"
                                                                          "coil.1.frame = z,0,1,0,0,3,3,1\ncoil.1.turns = 1\n")),
                  FieldSpecError);
  CHECK_THROWS_AS(build_windings(FitMesh(4, 4, 4), parse_field_spec(grid + "coil.1.frame = z,0,1,0,0,3,3,1\ncoil.1.turns = 1\n"
                                                                          "coil.2.frame = z,1,2,0,0,3,3,1\ncoil.2.turns = 1\n")),
                  FieldSpecError);
}

TEST_CASE("field spec parsing", "[fit]") {
  const FieldSpec s = load_field_spec(test::data_path("coil.fs"));
  CHECK(s.nx == 4);
  CHECK(s.coils.size() == 1);
  CHECK(s.conductor.has_value());
  CHECK(s.formulation == Formulation::TOmega);
  CHECK_THROWS_AS(parse_field_spec("grid.nx = 2\ngrid.ny = 2\ngrid.nz = 2\nbogus = 1\n"), FieldSpecError);
  CHECK_THROWS_AS(parse_field_spec("grid.nx = 2\ngrid.ny = 2\ngrid.nz = 2\ngrid.nx = 3\n"), FieldSpecError);
  CHECK_THROWS_AS(parse_field_spec("grid.nx = 2\ngrid.ny = 2\ngrid.nz = 2\ncoil.1.frame = z,0,0,0,0,1,1,2\ncoil.1.turns = 1\n"),
                  FieldSpecError);
  const FieldSpec r = refine(s, 2);
  CHECK(r.nx == 8);
  CHECK(r.dx == Approx(s.dx / 2));
  CHECK(r.coils[0].width == 2);
  CHECK(r.coils[0].turns == s.coils[0].turns);
}

TEST_CASE("B-H probes for the linear and the shipped curve", "[bh]") {
  CHECK(probe_bh_curve(BHCurve::linear(1.0)).all());
  const FieldSpec s = load_field_spec(test::data_path("coil_nonlinear.fs"));
  const BHCurve c = BHCurve::from_spec(s.bh);
  const BHProbeReport r = probe_bh_curve(c);
  CHECK(r.zero_at_origin);
  CHECK(r.slope_at_least_mu0);
  CHECK(r.saturates_to_mu0);
  CHECK(r.saturation_ratio == Approx(1.0).margin(0.01));
}

TEST_CASE("B-H curve derivatives and inverse", "[bh]") {
  const BHCurve c = BHCurve::brauer(1000.0, 200.0, 2.0);
  for (double h : {-3e4, -150.0, -1.0, 0.0, 2.0, 180.0, 5e3, 1e6}) {
    const double step = 1e-5 * std::max(1.0, std::abs(h));
    CHECK(c.db(h) == Approx((c.b(h + step) - c.b(h - step)) / (2 * step)).epsilon(1e-6));
    CHECK(c.d2b(h) == Approx((c.db(h + step) - c.db(h - step)) / (2 * step)).epsilon(1e-4).margin(1e-12));
    CHECK(c.h(c.b(h)) == Approx(h).epsilon(1e-10).margin(1e-9));
    CHECK(c.dh(c.b(h)) * c.db(h) == Approx(1.0).epsilon(1e-10));
    CHECK(c.db(h) >= mu0);
  }
  CHECK(c.db(0.0) == Approx(1000.0 * mu0));
  CHECK(c.b(-5.0) == -c.b(5.0));
}

TEST_CASE("differential material matrices", "[bh]") {
  const FieldSpec s = load_field_spec(test::data_path("coil_nonlinear.fs"));
  const FitMesh m(s);
  const MaterialMap map = MaterialMap::from_spec(m, s);
  const MaterialMatrices chord = build_materials(m, map);
  REQUIRE_FALSE(map.is_linear());

  SECTION("zero field gives the chord matrix") {
    const Vec md = differential_material(m, map, Vec::Zero(m.n_edges()), DifferentialKind::Permeability);
    CHECK((md - chord.mu).norm() <= 1e-12 * chord.mu.norm());
  }
  SECTION("linear material ignores the field") {
    const MaterialMap lin = MaterialMap::uniform(m, 4.0);
    const Vec h = Vec::Constant(m.n_edges(), 1e5);
    const Vec md = differential_material(m, lin, h, DifferentialKind::Permeability);
    CHECK((md - build_materials(m, lin).mu).norm() <= 1e-12 * md.norm());
  }
  SECTION("random fields give SPD diagonals matching differences of the flux") {
    const EdgeMaterialLaw law(m, map);
    std::mt19937_64 rng(23);
    std::lognormal_distribution<double> mag(std::log(300.0), 3.0);
    std::bernoulli_distribution sign;
    for (int trial = 0; trial < 200; ++trial) {
      Vec h(m.n_edges());
      for (Index e = 0; e < h.size(); ++e) h(e) = (sign(rng) ? 1 : -1) * mag(rng) * m.edge_length(e);
      const Vec md = differential_material(m, map, h, DifferentialKind::Permeability);
      REQUIRE((md.array() > 0).all());
      const Vec nd = differential_material(m, map, law.flux(h), DifferentialKind::Reluctivity);
      REQUIRE((nd.array() > 0).all());
      if (trial < 5) {
        const Vec step = 1e-6 * h.cwiseAbs().cwiseMax(1e-3);
        const Vec fd = (law.flux(h + step) - law.flux(h - step)).cwiseQuotient(2 * step);
        CHECK((fd - md).norm() <= 1e-6 * md.norm());
      }
    }
  }
}
