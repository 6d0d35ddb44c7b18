#pragma once

// Shared inputs for the unit and acceptance tests.

#include "fcsim/field_model.hpp"
#include "fcsim/field_spec.hpp"
#include "fcsim/mna.hpp"
#include "fcsim/netlist.hpp"

#include <map>
#include <memory>
#include <string>

namespace fcsim::test {

inline std::string data_path(const std::string& name) { return std::string(FCSIM_DATA_DIR) + "/" + name; }

/// Cube grid of n^3 cells with one z-axis coil at the bottom and a
/// conductor that does not touch it. Supported n: 2, 3, 4.
inline std::string cube_spec_text(int n, const std::string& formulation, bool conductor = true) {
  std::string s = "grid.nx = " + std::to_string(n) + "\ngrid.ny = " + std::to_string(n) + "\ngrid.nz = " + std::to_string(n) +
                  "\ngrid.dx = 0.01\ngrid.dy = 0.01\ngrid.dz = 0.01\n";
  switch (n) {
    case 2:
      s += "coil.1.frame = z,0,0,0,0,1,1,1\n";
      if (conductor) s += "conductor.box = 0,0,1,1,1,1\n";
      break;
    case 3:
      s += "coil.1.frame = z,0,0,0,0,2,2,1\n";
      if (conductor) s += "conductor.box = 0,0,1,2,2,2\n";
      break;
    case 4:
      s += "coil.1.frame = z,0,1,0,0,3,3,1\n";
      if (conductor) s += "conductor.box = 1,1,1,2,2,2\n";
      break;
    default:
      throw std::invalid_argument("cube_spec_text supports n = 2, 3, 4");
  }
  s += "coil.1.turns = 100\n";
  if (conductor) s += "conductor.sigma = 3.5e7\n";
  s += "formulation = " + formulation + "\n";
  return s;
}

inline field::FieldSpec cube_spec(int n, const std::string& formulation, bool conductor = true) {
  return field::parse_field_spec(cube_spec_text(n, formulation, conductor));
}

inline CoupledDaeSystem system_from(const std::string& text, const std::map<std::string, ElementPtr>& elements = {}) {
  return assemble(netlist::parse_netlist(text), elements);
}

}  // namespace fcsim::test
