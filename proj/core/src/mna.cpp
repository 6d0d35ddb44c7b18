#include "fcsim/mna.hpp"

#include <algorithm>

namespace fcsim {

namespace {

SpMat to_sparse(const Mat& m) { return m.sparseView(0.0, 0.0); }

void add_block(std::vector<Triplet>& t, const SpMat& m, Index row0, Index col0, double scale = 1.0) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

}  // namespace

Index VariableLayout::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<Index>(it - names.begin());
}

CoupledDaeSystem::CoupledDaeSystem(netlist::NetlistDocument doc, topology::IncidenceBlocks blocks, VariableLayout layout)
    : doc_(std::move(doc)), blocks_(std::move(blocks)), layout_(std::move(layout)) {
  a_c_ = to_sparse(blocks_.C);
  a_r_ = to_sparse(blocks_.R);
  a_l_ = to_sparse(blocks_.L);
  a_v_ = to_sparse(blocks_.V);
  a_i_ = to_sparse(blocks_.I);
  a_lambda_ = to_sparse(blocks_.lambda);
  auto values = [](const std::vector<topology::BranchColumn>& cols, bool invert) {
    Vec v(static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) v(static_cast<Index>(k)) = invert ? 1.0 / cols[k].value : cols[k].value;
    return v;
  };
  cap_ = values(blocks_.columns_C, false);
  cond_ = values(blocks_.columns_R, true);
  ind_ = values(blocks_.columns_L, false);
  for (const auto& c : blocks_.columns_V) v_wave_.push_back(doc_.find(c.branch)->waveform);
  for (const auto& c : blocks_.columns_I) i_wave_.push_back(doc_.find(c.branch)->waveform);
}

Vec CoupledDaeSystem::voltage_sources(double t) const {
  Vec v(static_cast<Index>(v_wave_.size()));
  for (std::size_t k = 0; k < v_wave_.size(); ++k) v(static_cast<Index>(k)) = netlist::evaluate_waveform(v_wave_[k], t);
  return v;
}

Vec CoupledDaeSystem::current_sources(double t) const {
  Vec v(static_cast<Index>(i_wave_.size()));
  for (std::size_t k = 0; k < i_wave_.size(); ++k) v(static_cast<Index>(k)) = netlist::evaluate_waveform(i_wave_[k], t);
  return v;
}

Vec CoupledDaeSystem::port_voltages(const ElementSlot& slot, const Vec& x) const {
  const Index np = slot.element->n_ports();
  const Vec e = x.head(layout_.n_e);
  return SpMat(a_lambda_.middleCols(slot.lambda_column, np)).transpose() * e;
}

ElementPoint CoupledDaeSystem::element_point(const ElementSlot& slot, const Vec& xdot, const Vec& x, double t) const {
  const Index nd = slot.element->n_dof();
  const Index np = slot.element->n_ports();
  ElementPoint p;
  p.xdot = xdot.segment(slot.x_offset, nd);
  p.x = x.segment(slot.x_offset, nd);
  p.idot = xdot.segment(slot.i_offset, np);
  p.i = x.segment(slot.i_offset, np);
  p.v = port_voltages(slot, x);
  p.t = t;
  return p;
}

Vec CoupledDaeSystem::residual(const Vec& xdot, const Vec& x, double t) const {
  const Index n_e = layout_.n_e, n_L = layout_.n_L, n_V = layout_.n_V;
  const Vec e = x.head(n_e);
  const Vec edot = xdot.head(n_e);
  const Vec i_l = x.segment(layout_.l_offset(), n_L);
  const Vec i_v = x.segment(layout_.v_offset(), n_V);

  Vec r = Vec::Zero(size());
  Vec kcl = a_c_ * (cap_.asDiagonal() * (a_c_.transpose() * edot));
  kcl += a_r_ * (cond_.asDiagonal() * (a_r_.transpose() * e));
  kcl += a_l_ * i_l + a_v_ * i_v + a_i_ * current_sources(t);
  for (const auto& s : layout_.slots) {
    const Index np = s.element->n_ports();
    kcl += a_lambda_.middleCols(s.lambda_column, np) * x.segment(s.i_offset, np);
  }
  r.head(n_e) = kcl;
  r.segment(layout_.l_offset(), n_L) = ind_.asDiagonal() * xdot.segment(layout_.l_offset(), n_L) - a_l_.transpose() * e;
  r.segment(layout_.v_offset(), n_V) = a_v_.transpose() * e - voltage_sources(t);
  for (const auto& s : layout_.slots) r.segment(s.row_offset, s.element->n_rows()) = s.element->residual(element_point(s, xdot, x, t));
  return r;
}

void CoupledDaeSystem::jacobians(const Vec& xdot, const Vec& x, double t, SpMat& e_out, SpMat& a_out) const {
  const Index n = size();
  const Index n_e = layout_.n_e, n_L = layout_.n_L, n_V = layout_.n_V;
  std::vector<Triplet> te, ta;

  add_block(te, SpMat(a_c_ * cap_.asDiagonal() * SpMat(a_c_.transpose())), 0, 0);
  add_block(ta, SpMat(a_r_ * cond_.asDiagonal() * SpMat(a_r_.transpose())), 0, 0);
  add_block(ta, a_l_, 0, layout_.l_offset());
  add_block(ta, a_v_, 0, layout_.v_offset());
  for (Index k = 0; k < n_L; ++k) te.emplace_back(layout_.l_offset() + k, layout_.l_offset() + k, ind_(k));
  add_block(ta, SpMat(a_l_.transpose()), layout_.l_offset(), 0, -1.0);
  add_block(ta, SpMat(a_v_.transpose()), layout_.v_offset(), 0);
  (void)n_V;

  for (const auto& s : layout_.slots) {
    const Index np = s.element->n_ports();
    const SpMat a_lam = a_lambda_.middleCols(s.lambda_column, np);
    add_block(ta, a_lam, 0, s.i_offset);
    const ElementJacobian j = s.element->jacobian(element_point(s, xdot, x, t));
    add_block(te, j.d_xdot, s.row_offset, s.x_offset);
    add_block(te, j.d_idot, s.row_offset, s.i_offset);
    add_block(ta, j.d_x, s.row_offset, s.x_offset);
    add_block(ta, j.d_i, s.row_offset, s.i_offset);
    add_block(ta, SpMat(j.d_v * SpMat(a_lam.transpose())), s.row_offset, 0);
  }
  (void)n_e;
  e_out.resize(n, n);
  a_out.resize(n, n);
  e_out.setFromTriplets(te.begin(), te.end());
  a_out.setFromTriplets(ta.begin(), ta.end());
}

Vec CoupledDaeSystem::source_vector(double t) const {
  const Vec z = Vec::Zero(size());
  return residual(z, z, t);
}

bool CoupledDaeSystem::is_linear() const {
  return std::all_of(layout_.slots.begin(), layout_.slots.end(), [](const auto& s) { return s.element->is_linear(); });
}

CoupledDaeSystem assemble(const netlist::NetlistDocument& doc, const std::map<std::string, ElementPtr>& elements) {
  topology::IncidenceBlocks blocks = topology::incidence_blocks(doc);
  VariableLayout lay;
  lay.n_e = blocks.n_e();
  lay.n_L = static_cast<Index>(blocks.columns_L.size());
  lay.n_V = static_cast<Index>(blocks.columns_V.size());
  for (const auto& n : blocks.node_names) lay.names.push_back("e_" + n);
  for (const auto& c : blocks.columns_L) lay.names.push_back("i_" + c.name);
  for (const auto& c : blocks.columns_V) lay.names.push_back("i_" + c.name);

  Index lambda_col = 0;
  for (const auto& br : doc.branches) {
    if (br.kind != netlist::BranchKind::X) continue;
    auto it = elements.find(br.name);
    if (it == elements.end() || !it->second) throw AssemblyError("no element bound to X branch '" + br.name + "'");
    const ElementPtr& el = it->second;
    const Index ports = static_cast<Index>(br.port_count());
    if (el->n_ports() != ports)
      throw AssemblyError("X branch '" + br.name + "' has " + std::to_string(ports) + " port(s) but its element has " +
                          std::to_string(el->n_ports()));
    ElementSlot s;
    s.name = br.name;
    s.element = el;
    s.lambda_column = lambda_col;
    s.x_offset = lay.size();
    for (Index k = 0; k < el->n_dof(); ++k) lay.names.push_back("x_" + br.name + "[" + std::to_string(k) + "]");
    s.i_offset = lay.size();
    for (Index p = 0; p < ports; ++p) lay.names.push_back("i_" + blocks.columns_lambda[static_cast<std::size_t>(lambda_col + p)].name);
    lambda_col += ports;
    lay.slots.push_back(s);
  }
  // Element residual rows follow the same ordering as their unknowns.
  for (auto& s : lay.slots) s.row_offset = s.x_offset;
  return CoupledDaeSystem(doc, std::move(blocks), std::move(lay));
}

}  // namespace fcsim
