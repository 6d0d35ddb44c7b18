#include "fcsim/fit_mesh.hpp"

#include <stdexcept>

namespace fcsim::field {

FitMesh::FitMesh(int nx, int ny, int nz, double dx, double dy, double dz) : n_{nx, ny, nz}, h_{dx, dy, dz} {
  if (nx <= 0 || ny <= 0 || nz <= 0) throw FieldSpecError("mesh cell counts must be positive");
  if (!(dx > 0 && dy > 0 && dz > 0)) throw FieldSpecError("mesh spacings must be positive");
  Index off_e = 0, off_f = 0;
  for (int d = 0; d < 3; ++d) {
    for (int a = 0; a < 3; ++a) {
      edge_dims_[d][a] = a == d ? n_[a] : n_[a] + 1;
      facet_dims_[d][a] = a == d ? n_[a] + 1 : n_[a];
    }
    edge_off_[d] = off_e;
    facet_off_[d] = off_f;
    off_e += static_cast<Index>(edge_dims_[d][0]) * edge_dims_[d][1] * edge_dims_[d][2];
    off_f += static_cast<Index>(facet_dims_[d][0]) * facet_dims_[d][1] * facet_dims_[d][2];
  }
}

Index FitMesh::n_nodes() const { return static_cast<Index>(n_[0] + 1) * (n_[1] + 1) * (n_[2] + 1); }
Index FitMesh::n_edges() const { return edge_off_[2] + static_cast<Index>(edge_dims_[2][0]) * edge_dims_[2][1] * edge_dims_[2][2]; }
Index FitMesh::n_facets() const {
  return facet_off_[2] + static_cast<Index>(facet_dims_[2][0]) * facet_dims_[2][1] * facet_dims_[2][2];
}
Index FitMesh::n_cells() const { return static_cast<Index>(n_[0]) * n_[1] * n_[2]; }

Index FitMesh::node(int i, int j, int k) const { return i + static_cast<Index>(n_[0] + 1) * (j + static_cast<Index>(n_[1] + 1) * k); }
Index FitMesh::cell(int i, int j, int k) const { return i + static_cast<Index>(n_[0]) * (j + static_cast<Index>(n_[1]) * k); }

Index FitMesh::edge(int d, int i, int j, int k) const {
  const auto& m = edge_dims_[d];
  return edge_off_[d] + i + static_cast<Index>(m[0]) * (j + static_cast<Index>(m[1]) * k);
}

Index FitMesh::facet(int d, int i, int j, int k) const {
  const auto& m = facet_dims_[d];
  return facet_off_[d] + i + static_cast<Index>(m[0]) * (j + static_cast<Index>(m[1]) * k);
}

std::array<int, 3> FitMesh::node_ijk(Index n) const {
  const Index px = n_[0] + 1, py = n_[1] + 1;
  return {static_cast<int>(n % px), static_cast<int>((n / px) % py), static_cast<int>(n / (px * py))};
}

std::array<int, 3> FitMesh::cell_ijk(Index c) const {
  return {static_cast<int>(c % n_[0]), static_cast<int>((c / n_[0]) % n_[1]), static_cast<int>(c / (static_cast<Index>(n_[0]) * n_[1]))};
}

std::pair<int, std::array<int, 3>> FitMesh::edge_ijk(Index e) const {
  int d = 2;
  while (d > 0 && e < edge_off_[d]) --d;
  const Index r = e - edge_off_[d];
  const auto& m = edge_dims_[d];
  return {d, {static_cast<int>(r % m[0]), static_cast<int>((r / m[0]) % m[1]), static_cast<int>(r / (static_cast<Index>(m[0]) * m[1]))}};
}

std::pair<int, std::array<int, 3>> FitMesh::facet_ijk(Index f) const {
  int d = 2;
  while (d > 0 && f < facet_off_[d]) --d;
  const Index r = f - facet_off_[d];
  const auto& m = facet_dims_[d];
  return {d, {static_cast<int>(r % m[0]), static_cast<int>((r / m[0]) % m[1]), static_cast<int>(r / (static_cast<Index>(m[0]) * m[1]))}};
}

bool FitMesh::valid_cell(int i, int j, int k) const {
  return i >= 0 && j >= 0 && k >= 0 && i < n_[0] && j < n_[1] && k < n_[2];
}

std::vector<Index> FitMesh::edge_cells(Index e) const {
  const auto [d, p] = edge_ijk(e);
  const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
  std::vector<Index> out;
  for (int b = -1; b <= 0; ++b) {
    for (int a = -1; a <= 0; ++a) {
      std::array<int, 3> c = p;
      c[d1] += a;
      c[d2] += b;
      if (valid_cell(c[0], c[1], c[2])) out.push_back(cell(c[0], c[1], c[2]));
    }
  }
  return out;
}

std::vector<Index> FitMesh::facet_cells(Index f) const {
  const auto [d, p] = facet_ijk(f);
  std::vector<Index> out;
  for (int a = -1; a <= 0; ++a) {
    std::array<int, 3> c = p;
    c[d] += a;
    if (valid_cell(c[0], c[1], c[2])) out.push_back(cell(c[0], c[1], c[2]));
  }
  return out;
}

bool FitMesh::boundary_edge(Index e) const { return edge_cells(e).size() < 4; }
bool FitMesh::boundary_facet(Index f) const { return facet_cells(f).size() < 2; }

bool FitMesh::boundary_node(Index n) const {
  const auto p = node_ijk(n);
  for (int d = 0; d < 3; ++d)
    if (p[d] == 0 || p[d] == n_[d]) return true;
  return false;
}

double FitMesh::edge_length(Index e) const { return h_[edge_ijk(e).first]; }

double FitMesh::facet_area(Index f) const {
  const int d = facet_ijk(f).first;
  return h_[(d + 1) % 3] * h_[(d + 2) % 3];
}

double FitMesh::dual_area(Index e) const {
  const int d = edge_ijk(e).first;
  const double quarter = 0.25 * h_[(d + 1) % 3] * h_[(d + 2) % 3];
  return quarter * static_cast<double>(edge_cells(e).size());
}

double FitMesh::dual_length(Index f) const {
  const int d = facet_ijk(f).first;
  return 0.5 * h_[d] * static_cast<double>(facet_cells(f).size());
}

DiscreteOperators build_operators(const FitMesh& mesh) {
  DiscreteOperators ops;
  std::vector<TripletI> tg, tc, ts;
  auto shifted = [](std::array<int, 3> p, int d) {
    ++p[d];
    return p;
  };

  for (Index e = 0; e < mesh.n_edges(); ++e) {
    const auto [d, p] = mesh.edge_ijk(e);
    const auto q = shifted(p, d);
    tg.emplace_back(e, mesh.node(q[0], q[1], q[2]), 1);
    tg.emplace_back(e, mesh.node(p[0], p[1], p[2]), -1);
  }
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    const auto [d, p] = mesh.facet_ijk(f);
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    const auto p1 = shifted(p, d1);
    const auto p2 = shifted(p, d2);
    tc.emplace_back(f, mesh.edge(d1, p[0], p[1], p[2]), 1);
    tc.emplace_back(f, mesh.edge(d2, p1[0], p1[1], p1[2]), 1);
    tc.emplace_back(f, mesh.edge(d1, p2[0], p2[1], p2[2]), -1);
    tc.emplace_back(f, mesh.edge(d2, p[0], p[1], p[2]), -1);
  }
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto p = mesh.cell_ijk(c);
    for (int d = 0; d < 3; ++d) {
      const auto q = shifted(p, d);
      ts.emplace_back(c, mesh.facet(d, q[0], q[1], q[2]), 1);
      ts.emplace_back(c, mesh.facet(d, p[0], p[1], p[2]), -1);
    }
  }
  ops.G.resize(mesh.n_edges(), mesh.n_nodes());
  ops.C.resize(mesh.n_facets(), mesh.n_edges());
  ops.S.resize(mesh.n_cells(), mesh.n_facets());
  ops.G.setFromTriplets(tg.begin(), tg.end());
  ops.C.setFromTriplets(tc.begin(), tc.end());
  ops.S.setFromTriplets(ts.begin(), ts.end());
  return ops;
}

SpMatI reduced_dual_divergence_t(const DiscreteOperators& ops, Index pinned_node) {
  const Index n_nodes = ops.G.cols();
  if (pinned_node < 0 || pinned_node >= n_nodes) throw std::out_of_range("pinned node out of range");
  std::vector<TripletI> t;
  for (Index k = 0; k < ops.G.outerSize(); ++k) {
    for (SpMatI::InnerIterator it(ops.G, k); it; ++it) {
      if (it.col() == pinned_node) continue;
      const Index col = it.col() < pinned_node ? it.col() : it.col() - 1;
      t.emplace_back(it.row(), col, -it.value());
    }
  }
  SpMatI out(ops.G.rows(), n_nodes - 1);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace fcsim::field
