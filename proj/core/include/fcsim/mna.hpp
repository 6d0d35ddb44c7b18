#pragma once

// Modified nodal analysis with generalized-element slots.
//
// Unknown layout: node potentials e, inductor currents i_L, voltage-source
// currents i_V, then (x, i) for each X branch in netlist order.

#include "fcsim/element.hpp"
#include "fcsim/netlist.hpp"
#include "fcsim/topology.hpp"

#include <map>
#include <string>
#include <vector>

namespace fcsim {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ElementSlot {
  std::string name;
  ElementPtr element;
  Index x_offset = 0;  // first x entry in the unknown vector
  Index i_offset = 0;  // first port current
  Index lambda_column = 0;  // first column in A_lambda
  Index row_offset = 0;  // first element residual row
};

struct VariableLayout {
  Index n_e = 0, n_L = 0, n_V = 0;
  std::vector<ElementSlot> slots;
  std::vector<std::string> names;  // one per unknown

  Index size() const { return static_cast<Index>(names.size()); }
  Index e_offset() const { return 0; }
  Index l_offset() const { return n_e; }
  Index v_offset() const { return n_e + n_L; }
  Index index_of(const std::string& name) const;  // -1 when absent
};

/// Residual F(dx/dt, x, t) of the coupled MNA system and its Jacobians.
class CoupledDaeSystem {
 public:
  CoupledDaeSystem(netlist::NetlistDocument doc, topology::IncidenceBlocks blocks, VariableLayout layout);

  Index size() const { return layout_.size(); }
  const VariableLayout& layout() const { return layout_; }
  const topology::IncidenceBlocks& blocks() const { return blocks_; }
  const netlist::NetlistDocument& document() const { return doc_; }

  Vec residual(const Vec& xdot, const Vec& x, double t) const;
  /// E = dF/d(dx/dt), A = dF/dx.
  void jacobians(const Vec& xdot, const Vec& x, double t, SpMat& e, SpMat& a) const;
  /// F(0, x, t) split as A x + f(t) for linear systems: returns f(t) = F(0, 0, t).
  Vec source_vector(double t) const;

  bool is_linear() const;

  Vec voltage_sources(double t) const;
  Vec current_sources(double t) const;

  /// Per-element port voltages v = A_lambda^T e for slot k.
  Vec port_voltages(const ElementSlot& slot, const Vec& x) const;

 private:
  netlist::NetlistDocument doc_;
  topology::IncidenceBlocks blocks_;
  VariableLayout layout_;
  SpMat a_c_, a_r_, a_l_, a_v_, a_i_, a_lambda_;
  Vec cap_, cond_, ind_;
  std::vector<netlist::Waveform> v_wave_, i_wave_;

  ElementPoint element_point(const ElementSlot& slot, const Vec& xdot, const Vec& x, double t) const;
};

/// Builds the coupled system. Every X branch must have an element bound under
/// its name, with matching port count.
CoupledDaeSystem assemble(const netlist::NetlistDocument& doc, const std::map<std::string, ElementPtr>& elements);

}  // namespace fcsim
