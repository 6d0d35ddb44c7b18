#include "fcsim/netlist.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace fcsim::netlist;
using Catch::Approx;

TEST_CASE("short-form source and resistor parse into two branches", "[netlist]") {
  const auto doc = parse_netlist("V1 1 0 SIN 1.0 1.0\nR1 1 0 1.0\n.ground 0");
  REQUIRE(doc.branches.size() == 2);
  CHECK(doc.ground == "0");
  CHECK(doc.nodes == std::vector<std::string>{"1", "0"});
  CHECK(doc.branches[0].kind == BranchKind::V);
  CHECK(doc.branches[0].waveform.form == Waveform::Form::SIN);
  CHECK(doc.branches[0].waveform.amplitude == 1.0);
  CHECK(doc.branches[0].waveform.frequency == 1.0);
  CHECK(doc.branches[1].kind == BranchKind::R);
  CHECK(doc.branches[1].value == 1.0);
}

TEST_CASE("long form equals short form", "[netlist]") {
  const auto a = parse_netlist("V V1 1 0 DC 2\nR R1 1 2 3\nL L1 2 0 4\n.ground 0\n");
  const auto b = parse_netlist("V1 1 0 DC 2\nR1 1 2 3\nL1 2 0 4\n.ground 0\n");
  CHECK(a == b);
}

TEST_CASE("non-positive inductance is rejected with its position", "[netlist]") {
  try {
    parse_netlist("L1 1 0 -2.0\n.ground 0");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 8);
    CHECK(std::string(e.what()).find("non-positive") != std::string::npos);
  }
}

TEST_CASE("X branch binds a field spec path", "[netlist]") {
  const auto doc = parse_netlist("X1 1 0 field=coil.fs\n.ground 0");
  REQUIRE(doc.branches.size() == 1);
  const Branch& x = doc.branches[0];
  CHECK(x.kind == BranchKind::X);
  CHECK(x.field_spec == "coil.fs");
  CHECK(x.port_count() == 1);
  CHECK(doc.field_specs.at("X1") == "coil.fs");
}

TEST_CASE("multi-port X lists node pairs", "[netlist]") {
  const auto doc = parse_netlist("X1 1 0 2 0 field=two.fs\nR1 1 2 1\n.ground 0");
  CHECK(doc.branches[0].port_count() == 2);
}

TEST_CASE("malformed input is reported", "[netlist]") {
  CHECK_THROWS_AS(parse_netlist("R1 1 0 1\n"), ParseError);                         // no ground
  CHECK_THROWS_AS(parse_netlist("R1 1 1 1\n.ground 0"), ParseError);                // self loop
  CHECK_THROWS_AS(parse_netlist("R1 1 0 1\nR1 1 0 2\n.ground 0"), ParseError);      // duplicate name
  CHECK_THROWS_AS(parse_netlist("Q1 1 0 1\n.ground 0"), ParseError);                // unknown kind
  CHECK_THROWS_AS(parse_netlist("V1 1 0 SQUARE 1\n.ground 0"), ParseError);         // unknown waveform
  CHECK_THROWS_AS(parse_netlist("R1 1 0 abc\n.ground 0"), ParseError);              // not a number
  CHECK_THROWS_AS(parse_netlist("X1 1 0\n.ground 0"), ParseError);                  // missing spec
  CHECK_THROWS_AS(parse_netlist("R1 1 0 1\n.ground 0\n.ground 1"), ParseError);     // two grounds
  CHECK_THROWS_AS(parse_netlist("C1 1 0 0\n.ground 0"), ParseError);                // zero capacitance
}

TEST_CASE("comments and blank lines are ignored", "[netlist]") {
  const auto doc = parse_netlist("# header\n\nR1 1 0 1 # trailing\n   \n.ground 0\n");
  CHECK(doc.branches.size() == 1);
}

TEST_CASE("waveform evaluation", "[netlist]") {
  Waveform s;
  s.form = Waveform::Form::SIN;
  s.amplitude = 1.0;
  s.frequency = 2.0 * std::numbers::pi;
  CHECK(evaluate_waveform(s, 0.0) == 0.0);

  Waveform p = s;
  p.pert_eps = 1e-4;
  p.pert_freq = 2.0 * std::numbers::pi * 1e9;
  CHECK(evaluate_waveform(p, 0.0) == 0.0);

  Waveform dc;
  dc.amplitude = 3.3;
  for (double t : {0.0, 0.1, 17.0}) CHECK(evaluate_waveform(dc, t) == 3.3);
}

TEST_CASE("perturbation enters additively", "[netlist]") {
  Waveform base;
  base.form = Waveform::Form::SIN;
  base.amplitude = 0.7;
  base.frequency = 3.0;
  base.phase = 0.2;
  Waveform pert = base;
  pert.pert_eps = 1e-4;
  pert.pert_freq = 3e9;
  for (double t : {0.0, 1.234e-5, 0.1, 0.4999}) {
    const double diff = evaluate_waveform(pert, t) - evaluate_waveform(base, t);
    CHECK(diff == Approx(1e-4 * std::sin(2.0 * std::numbers::pi * 3e9 * t)).margin(1e-15));
  }
}

TEST_CASE("serialize and parse round trip", "[netlist]") {
  const char* text =
      "V1 in 0 SIN 1.5 6.283185307179586 0.25 PERT 0.0001 6283185307.179586\n"
      "I2 0 mid DC 0.5\n"
      "R1 in mid 10\n"
      "C1 mid 0 1e-06\n"
      "L1 mid out 0.001\n"
      "X1 out 0 field=data/coil.fs\n"
      ".ground 0\n";
  const auto doc = parse_netlist(text);
  const auto again = parse_netlist(serialize(doc));
  CHECK(again == doc);
  CHECK(serialize(again) == serialize(doc));
}
