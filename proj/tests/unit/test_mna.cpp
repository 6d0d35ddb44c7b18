#include "fcsim/element.hpp"
#include "fcsim/field_suite.hpp"
#include "fcsim/mna.hpp"
#include "fcsim/solver.hpp"

#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace fcsim;
using Catch::Approx;

namespace {

Vec random_vec(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index k = 0; k < n; ++k) v(k) = nd(rng);
  return v;
}

// Central differences of the coupled residual with respect to x and x'.
void fd_jacobians(const CoupledDaeSystem& sys, const Vec& xdot, const Vec& x, double t, Mat& e, Mat& a) {
  const Index n = sys.size();
  e.resize(n, n);
  a.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    a.col(k) = (sys.residual(xdot, xp, t) - sys.residual(xdot, xm, t)) / (2 * h);
    const double hd = 1e-6 * std::max(1.0, std::abs(xdot(k)));
    Vec dp = xdot, dm = xdot;
    dp(k) += hd;
    dm(k) -= hd;
    e.col(k) = (sys.residual(dp, x, t) - sys.residual(dm, x, t)) / (2 * hd);
  }
}

double relative(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("lumped inductor elements are inductance-like", "[element]") {
  const LinearInductorElement l2(2.0);
  const InductanceReport r = verify_inductance_like(l2, ElementPoint::zero(0, 1));
  REQUIRE(r.L.rows() == 1);
  CHECK(r.L(0, 0) == Approx(2.0).epsilon(1e-12));
  CHECK(r.spd);

  const FluxInductorElement cubic(
      1, [](const Vec& i, double) { return Vec(i.array() + i.array().cube() / 3.0); },
      [](const Vec& i, double) { return Mat((1.0 + i.array().square()).matrix().asDiagonal()); });
  ElementPoint p = ElementPoint::zero(1, 1);
  p.i(0) = 1.0;
  p.x(0) = 4.0 / 3.0;
  const InductanceReport rc = verify_inductance_like(cubic, p);
  CHECK(rc.L(0, 0) == Approx(2.0).epsilon(1e-10));
  CHECK(rc.spd);
}

TEST_CASE("a non-SPD inductance matrix is rejected", "[element]") {
  Mat bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(LinearInductorElement(bad), ElementError);
}

TEST_CASE("element Jacobians match finite differences", "[element]") {
  const FluxInductorElement cubic(
      2, [](const Vec& i, double) { return Vec(i.array() + i.array().cube() / 3.0); },
      [](const Vec& i, double) { return Mat((1.0 + i.array().square()).matrix().asDiagonal()); });
  std::mt19937_64 rng(11);
  ElementPoint p;
  p.xdot = random_vec(2, rng);
  p.idot = random_vec(2, rng);
  p.x = random_vec(2, rng);
  p.i = random_vec(2, rng);
  p.v = random_vec(2, rng);
  const ElementJacobian j = cubic.jacobian(p);
  const ElementJacobian f = finite_difference_jacobian(cubic, p);
  CHECK(relative(Mat(j.d_x), Mat(f.d_x)) + relative(Mat(j.d_xdot), Mat(f.d_xdot)) < 1e-6);
  CHECK(relative(Mat(j.d_i), Mat(f.d_i)) < 1e-6);
  CHECK(relative(Mat(j.d_v), Mat(f.d_v)) < 1e-6);
}

TEST_CASE("V-R loop: e1 = 1 and i_V = -1 at steady state", "[mna]") {
  const CoupledDaeSystem sys = test::system_from("V1 1 0 DC 1\nR1 1 0 1\n.ground 0");
  const auto [e, a] = linearize(sys, Vec::Zero(sys.size()), 0.0);
  const Vec f = sys.source_vector(0.0);
  const Vec x = Mat(a).fullPivLu().solve(-f);
  CHECK(x(sys.layout().index_of("e_1")) == Approx(1.0));
  CHECK(x(sys.layout().index_of("i_V1")) == Approx(-1.0));
  CHECK(sys.residual(Vec::Zero(sys.size()), x, 0.0).norm() < 1e-14);
}

TEST_CASE("unknown ordering is e, i_L, i_V, then element blocks", "[mna]") {
  const auto l = std::make_shared<LinearInductorElement>(1.0);
  const CoupledDaeSystem sys = test::system_from("V1 1 0 DC 1\nR1 1 2 1\nL1 2 3 1\nX1 3 0 field=unused.fs\n.ground 0", {{"X1", l}});
  CHECK(sys.layout().names == std::vector<std::string>{"e_1", "e_2", "e_3", "i_L1", "i_V1", "i_X1"});
}

TEST_CASE("KCL rows are the plain sum of branch stamps", "[mna]") {
  const CoupledDaeSystem sys = test::system_from("V1 1 0 DC 2\nR1 1 2 4\nC1 2 0 3\nL1 2 0 5\nI1 0 2 DC 0.5\n.ground 0");
  const auto& lay = sys.layout();
  std::mt19937_64 rng(5);
  const Vec x = random_vec(sys.size(), rng), xd = random_vec(sys.size(), rng);
  const Vec r = sys.residual(xd, x, 0.0);
  const double e1 = x(lay.index_of("e_1")), e2 = x(lay.index_of("e_2"));
  const double iv = x(lay.index_of("i_V1")), il = x(lay.index_of("i_L1"));
  // Node 1: resistor current 1 -> 2 plus the source current.
  CHECK(r(lay.index_of("e_1")) == Approx((e1 - e2) / 4 + iv).margin(1e-14));
  // Node 2: resistor current into the node, capacitor, inductor, current source 0 -> 2 injects.
  CHECK(r(lay.index_of("e_2")) == Approx(-(e1 - e2) / 4 + 3 * xd(lay.index_of("e_2")) + il - 0.5).margin(1e-14));
  CHECK(r(lay.index_of("i_L1")) == Approx(5 * xd(lay.index_of("i_L1")) - e2).margin(1e-14));
  CHECK(r(lay.index_of("i_V1")) == Approx(e1 - 2.0).margin(1e-14));
}

TEST_CASE("X bound to a linear inductor equals a native inductor", "[mna]") {
  const auto l = std::make_shared<LinearInductorElement>(0.3);
  const CoupledDaeSystem native = test::system_from("V1 1 0 SIN 1 2\nR1 1 2 1\nL1 2 0 0.3\n.ground 0");
  const CoupledDaeSystem coupled = test::system_from("V1 1 0 SIN 1 2\nR1 1 2 1\nX1 2 0 field=unused.fs\n.ground 0", {{"X1", l}});
  // Layouts: native (e1, e2, iL, iV); coupled (e1, e2, iV, iX).
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.indices() << 0, 1, 3, 2;  // native index -> coupled index
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = random_vec(4, rng), xd = random_vec(4, rng);
    const Vec rn = native.residual(xd, x, 0.1 * trial);
    const Vec rc = coupled.residual(perm * xd, perm * x, 0.1 * trial);
    CHECK((perm * rn - rc).norm() <= 1e-14 * std::max(1.0, rn.norm()));
  }

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  const TimeSeries a = implicit_euler(native, cfg);
  const TimeSeries b = implicit_euler(coupled, cfg);
  const auto& ia = a.column("i_L1");
  const auto& ib = b.column("i_X1");
  double worst = 0.0;
  for (std::size_t k = 0; k < ia.size(); ++k) worst = std::max(worst, std::abs(ia[k] - ib[k]));
  CHECK(worst < 1e-12);
}

TEST_CASE("coupled Jacobians match finite differences", "[mna]") {
  const field::FitModel model = field::FitModel::build(test::cube_spec(2, "tomega"));
  const auto x1 = field::make_field_element(model);
  const auto l = std::make_shared<LinearInductorElement>(0.3);
  const CoupledDaeSystem sys = test::system_from(
      "V1 1 0 SIN 1 2\nR1 1 2 1\nC1 2 0 1e-3\nX1 2 3 field=a.fs\nX2 3 0 field=b.fs\nL1 3 0 2\n.ground 0", {{"X1", x1}, {"X2", l}});
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = random_vec(sys.size(), rng), xd = random_vec(sys.size(), rng);
    SpMat e, a;
    sys.jacobians(xd, x, 0.01 * trial, e, a);
    Mat fe, fa;
    fd_jacobians(sys, xd, x, 0.01 * trial, fe, fa);
    CHECK(relative(Mat(e), fe) < 1e-6);
    CHECK(relative(Mat(a), fa) < 1e-6);
  }
}

TEST_CASE("assembly checks bindings", "[mna]") {
  const auto doc = netlist::parse_netlist("V1 1 0 DC 1\nX1 1 0 field=a.fs\n.ground 0");
  CHECK_THROWS_AS(assemble(doc, {}), AssemblyError);
  Mat l2 = Mat::Identity(2, 2);
  CHECK_THROWS_AS(assemble(doc, {{"X1", std::make_shared<LinearInductorElement>(l2)}}), AssemblyError);
}
