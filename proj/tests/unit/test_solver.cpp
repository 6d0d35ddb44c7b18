#include "fcsim/astar.hpp"
#include "fcsim/field_suite.hpp"
#include "fcsim/pencil.hpp"
#include "fcsim/solver.hpp"
#include "fcsim/tomega.hpp"

#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

using namespace fcsim;
using Catch::Approx;

namespace {

const char* rl_text = "V1 1 0 DC 1\nR1 1 2 1\nL1 2 0 1\n.ground 0";

double rl_error(double dt) {
  const CoupledDaeSystem sys = test::system_from(rl_text);
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.t_end = 1.0;
  const TimeSeries ts = implicit_euler(sys, cfg);
  return std::abs(ts.column("i_L1").back() - (1.0 - std::exp(-1.0)));
}

CoupledDaeSystem coil_system(const std::string& netlist_file) {
  const auto doc = netlist::load_netlist(test::data_path(netlist_file));
  return assemble(doc, field::bind_field_elements(doc, FCSIM_DATA_DIR));
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    const std::size_t end = s.find("\r\n", start);
    REQUIRE(end != std::string::npos);
    out.push_back(s.substr(start, end - start));
    start = end + 2;
  }
  return out;
}

}  // namespace

TEST_CASE("pencil index examples", "[pencil]") {
  const Mat i2 = Mat::Identity(2, 2);
  CHECK(pencil_index(i2, i2) == 0);
  CHECK(pencil_index(Mat::Zero(2, 2), i2) == 1);
  Mat n(2, 2);
  n << 0, 1, 0, 0;
  CHECK(pencil_index(n, i2) == 2);
  Mat n3 = Mat::Zero(3, 3);
  n3(0, 1) = n3(1, 2) = 1;
  CHECK(pencil_index(n3, Mat::Identity(3, 3)) == 3);
  CHECK_THROWS_AS(pencil_index(Mat::Zero(2, 2), Mat::Zero(2, 2)), SingularPencilError);
}

TEST_CASE("pencil index is invariant under equivalence transforms", "[pencil]") {
  Mat e = Mat::Zero(4, 4), a = Mat::Identity(4, 4);
  e(0, 0) = 1;
  e(1, 2) = 1;  // nilpotent block of size 2 on (1, 2); (3) algebraic
  Mat s(4, 4), t(4, 4);
  s << 2, 1, 0, 0, 0, 3, 1, 0, 1, 0, 1, 2, 0, 0, 1, 5;
  t << 1, 0, 2, 0, 1, 1, 0, 0, 0, 3, 1, 1, 2, 0, 0, 1;
  CHECK(pencil_index(e, a) == 2);
  CHECK(pencil_index(s * e * t, s * a * t) == 2);
}

TEST_CASE("circuit pencils", "[pencil]") {
  SECTION("RL ladder has index 1") {
    const CoupledDaeSystem sys = test::system_from(rl_text);
    CHECK(sys.size() == 4);
    const auto [e, a] = linearize(sys, Vec::Zero(sys.size()), 0.0);
    CHECK(pencil_index(Mat(e), Mat(a)) == 1);
  }
  SECTION("current source feeding an inductive element has index 2") {
    const CoupledDaeSystem sys =
        test::system_from("I1 0 1 DC 1\nX1 1 0 field=l.fs\n.ground 0", {{"X1", std::make_shared<LinearInductorElement>(0.5)}});
    const auto [e, a] = linearize(sys, Vec::Zero(sys.size()), 0.0);
    CHECK(pencil_index(Mat(e), Mat(a)) == 2);
  }
}

TEST_CASE("field elements driven alone", "[pencil]") {
  for (const char* f : {"tomega", "astar"})
    for (int n : {2, 4}) {
      INFO(f << " n = " << n);
      const field::FitModel model = field::FitModel::build(test::cube_spec(n, f));
      const ElementPtr el = field::make_field_element(model);
      const ElementPoint p = ElementPoint::zero(el->n_dof(), el->n_ports());
      const auto [ev, av] = element_pencil(*el, Excitation::Voltage, p);
      CHECK(pencil_index(ev, av) == 1);
      const auto [ei, ai] = element_pencil(*el, Excitation::Current, p);
      CHECK(pencil_index(ei, ai) == 2);
    }
}

TEST_CASE("RL step response converges with first order", "[solver]") {
  const double e1 = rl_error(1e-3), e2 = rl_error(5e-4), e3 = rl_error(2.5e-4);
  CHECK(e1 / e2 == Approx(2.0).margin(0.3));
  CHECK(e2 / e3 == Approx(2.0).margin(0.3));
  CHECK(e3 < 1e-4);
}

TEST_CASE("V-R circuit is stationary", "[solver]") {
  const CoupledDaeSystem sys = test::system_from("V1 1 0 DC 1\nR1 1 0 1\n.ground 0");
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 1.0;
  const TimeSeries ts = implicit_euler(sys, cfg);
  CHECK(ts.rows() == 11);
  for (double v : ts.column("e_1")) CHECK(v == Approx(1.0).epsilon(1e-14));
  for (double v : ts.column("i_V1")) CHECK(v == Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("the last step lands on the end time", "[solver]") {
  const CoupledDaeSystem sys = test::system_from(rl_text);
  SolverConfig cfg;
  cfg.dt = 0.3;
  cfg.t_end = 1.0;
  const TimeSeries ts = implicit_euler(sys, cfg);
  REQUIRE(ts.rows() == 5);
  CHECK(ts.times.front() == 0.0);
  CHECK(ts.times.back() == 1.0);
  CHECK(ts.times[3] == Approx(0.9));
}

TEST_CASE("solver configuration is validated", "[solver]") {
  SolverConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 1e-3;
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.t_end = 1.0;
  cfg.newton_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("consistent initialization", "[solver]") {
  SECTION("algebraic projection on the RL ladder") {
    const CoupledDaeSystem sys = test::system_from(rl_text);
    SolverConfig cfg;
    const Vec x0 = consistent_init(sys, cfg);
    CHECK(algebraic_residual(sys, x0, 0.0) <= 1e-12);
    CHECK(x0(sys.layout().index_of("e_1")) == Approx(1.0));
    CHECK(x0(sys.layout().index_of("i_L1")) == 0.0);
  }
  SECTION("warm-up of the current-driven coil") {
    const CoupledDaeSystem sys = coil_system("coil_idriven.cir");
    SolverConfig cfg;
    cfg.init_mode = InitMode::TwoStepWarmup;
    const Vec x0 = consistent_init(sys, cfg);
    CHECK(algebraic_residual(sys, x0, 0.0) <= 1e-10);
  }
  SECTION("a wrong-size guess is rejected") {
    const CoupledDaeSystem sys = test::system_from(rl_text);
    SolverConfig cfg;
    cfg.initial_guess = Vec::Zero(2);
    CHECK_THROWS(consistent_init(sys, cfg));
  }
}

TEST_CASE("CSV output", "[solver]") {
  const CoupledDaeSystem sys = test::system_from(rl_text);
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 0.5;
  OutputSelection sel;
  sel.all_nodes = false;
  sel.nodes = {"1"};
  const TimeSeries ts = implicit_euler(sys, cfg, sel);
  std::ostringstream os;
  ts.write_csv(os);
  const auto lines = split_lines(os.str());
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "time,e_1,i_L1,i_V1");

  // Every value reads back to the identical double.
  for (std::size_t r = 1; r < lines.size(); ++r) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= lines[r].size()) {
      const std::size_t end = std::min(lines[r].find(',', start), lines[r].size());
      double v = 0.0;
      const auto res = std::from_chars(lines[r].data() + start, lines[r].data() + end, v);
      REQUIRE(res.ec == std::errc());
      values.push_back(v);
      start = end + 1;
    }
    REQUIRE(values.size() == 4);
    CHECK(values[0] == ts.times[r - 1]);
    CHECK(values[2] == ts.column("i_L1")[r - 1]);
  }

  TimeSeries quoted;
  quoted.times = {0.5};
  quoted.names = {"a,b", "say \"hi\""};
  quoted.columns = {{1.0}, {2.0}};
  std::ostringstream q;
  quoted.write_csv(q);
  CHECK(q.str() == "time,\"a,b\",\"say \"\"hi\"\"\"\r\n0.5,1,2\r\n");
}

TEST_CASE("simulations are deterministic", "[solver]") {
  const CoupledDaeSystem sys = coil_system("coil_vdriven.cir");
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.05;
  std::ostringstream a, b;
  implicit_euler(sys, cfg).write_csv(a);
  implicit_euler(sys, cfg).write_csv(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("the voltage-driven coil runs at the finest step", "[solver][slow]") {
  const CoupledDaeSystem sys = coil_system("coil_vdriven.cir");
  SolverConfig cfg;
  cfg.dt = 1e-5;
  cfg.t_end = 0.5;
  const TimeSeries ts = implicit_euler(sys, cfg);
  CHECK(ts.rows() == 50001);
  CHECK(ts.times.back() == 0.5);
  const auto& i = ts.column("i_X1");
  CHECK(std::all_of(i.begin(), i.end(), [](double v) { return std::isfinite(v); }));
}
