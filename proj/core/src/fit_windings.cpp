#include "fcsim/fit_windings.hpp"

#include <map>
#include <set>

namespace fcsim::field {

namespace {

// Grid coordinates of coil coordinates (layer, a, b).
std::array<int, 3> grid_coords(int axis, int layer, int a, int b) {
  switch (axis) {
    case 0: return {layer, a, b};
    case 1: return {b, layer, a};
    default: return {a, b, layer};
  }
}

double ring_current(const CoilSpec& c) {
  return c.turns / (static_cast<double>(c.width) * (c.layer1 - c.layer0 + 1));
}

SpMat column(Index rows, const std::map<Index, double>& entries) {
  std::vector<Triplet> t;
  for (const auto& [r, v] : entries)
    if (v != 0.0) t.emplace_back(r, 0, v);
  SpMat m(rows, 1);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

std::vector<Index> coil_cells(const FitMesh& mesh, const CoilSpec& coil) {
  std::vector<Index> out;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto p = mesh.cell_ijk(c);
    if (coil.contains(p[0], p[1], p[2])) out.push_back(c);
  }
  return out;
}

SpMat winding_facet_currents(const FitMesh& mesh, const CoilSpec& coil) {
  const int d1 = (coil.axis + 1) % 3, d2 = (coil.axis + 2) % 3;
  const double c = ring_current(coil);
  std::map<Index, double> j;
  auto add = [&](int d, int layer, int a, int b, double v) {
    const auto g = grid_coords(coil.axis, layer, a, b);
    j[mesh.facet(d, g[0], g[1], g[2])] += v;
  };
  for (int layer = coil.layer0; layer <= coil.layer1; ++layer) {
    for (int m = 0; m < coil.width; ++m) {
      const int lo_a = coil.a0 + m, hi_a = coil.a1 - m, lo_b = coil.b0 + m, hi_b = coil.b1 - m;
      for (int a = lo_a; a < hi_a; ++a) add(d1, layer, a + 1, lo_b, c);   // along +a on the low-b side
      for (int b = lo_b; b < hi_b; ++b) add(d2, layer, hi_a, b + 1, c);   // along +b on the high-a side
      for (int a = hi_a; a > lo_a; --a) add(d1, layer, a, hi_b, -c);      // along -a on the high-b side
      for (int b = hi_b; b > lo_b; --b) add(d2, layer, lo_a, b, -c);      // along -b on the low-a side
    }
  }
  return column(mesh.n_facets(), j);
}

SpMat winding_edge_potential(const FitMesh& mesh, const CoilSpec& coil) {
  const double c = ring_current(coil);
  std::map<Index, double> y;
  for (int layer = coil.layer0; layer <= coil.layer1; ++layer) {
    for (int m = 0; m < coil.width; ++m) {
      for (int a = coil.a0 + m + 1; a <= coil.a1 - m; ++a) {
        for (int b = coil.b0 + m + 1; b <= coil.b1 - m; ++b) {
          const auto g = grid_coords(coil.axis, layer, a, b);
          y[mesh.edge(coil.axis, g[0], g[1], g[2])] += c;
        }
      }
    }
  }
  return column(mesh.n_edges(), y);
}

WindingFunctions build_windings(const FitMesh& mesh, const FieldSpec& spec) {
  std::set<Index> taken;
  for (std::size_t k = 0; k < spec.coils.size(); ++k) {
    for (Index c : coil_cells(mesh, spec.coils[k])) {
      const auto p = mesh.cell_ijk(c);
      if (spec.is_conducting(p[0], p[1], p[2]))
        throw FieldSpecError("coil " + std::to_string(k + 1) + " overlaps the conductor");
      if (!taken.insert(c).second) throw FieldSpecError("coil " + std::to_string(k + 1) + " overlaps another coil");
    }
  }
  std::vector<SpMat> js, ys;
  for (const auto& coil : spec.coils) {
    js.push_back(winding_facet_currents(mesh, coil));
    ys.push_back(winding_edge_potential(mesh, coil));
  }
  std::vector<const SpMat*> jp, yp;
  for (const auto& m : js) jp.push_back(&m);
  for (const auto& m : ys) yp.push_back(&m);
  WindingFunctions w;
  w.facet_current = spec.coils.empty() ? SpMat(mesh.n_facets(), 0) : hstack(jp);
  w.Y = spec.coils.empty() ? SpMat(mesh.n_edges(), 0) : hstack(yp);
  return w;
}

}  // namespace fcsim::field
