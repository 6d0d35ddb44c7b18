#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "fcsim/astar.hpp"
#include "fcsim/field_model.hpp"
#include "fcsim/gauge.hpp"
#include "fcsim/tomega.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <set>
#include <vector>

namespace fcsim::test {

using namespace fcsim::field;

inline std::vector<Index> conducting_cells(const FitModel& model) {
  std::vector<Index> c;
  for (Index k = 0; k < model.mesh.n_cells(); ++k)
    if (model.map.conducting(k)) c.push_back(k);
  return c;
}

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  }
  bool join(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

inline SpMat selection_of(Index rows, const std::vector<Index>& kept) {
  SpMat p(rows, static_cast<Index>(kept.size()));
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < kept.size(); ++k) t.emplace_back(kept[k], static_cast<Index>(k), 1.0);
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

// A different T-Omega gauge: Kruskal over the conductor's edges, surface edges
// first, both groups in descending index order, with the scalar potential
// pinned at the highest conductor node.
inline TOmegaGauge alternative_tomega_gauge(const FitModel& model) {
  const FitMesh& m = model.mesh;
  const auto cells = conducting_cells(model);
  const auto region = region_edges(m, cells);
  const auto interior = interior_edges(m, cells);
  const std::set<Index> inner(interior.begin(), interior.end());
  std::vector<Index> order;
  for (auto it = region.rbegin(); it != region.rend(); ++it)
    if (!inner.count(*it)) order.push_back(*it);
  for (auto it = interior.rbegin(); it != interior.rend(); ++it) order.push_back(*it);

  SpanningTree tree;
  tree.nodes = region_nodes(m, cells);
  tree.root = tree.nodes.back();
  tree.edges = region;
  UnionFind uf(m.n_nodes());
  for (Index e : order) {
    const auto [d, p] = m.edge_ijk(e);
    auto q = p;
    ++q[static_cast<std::size_t>(d)];
    if (uf.join(m.node(p[0], p[1], p[2]), m.node(q[0], q[1], q[2]))) tree.tree_edges.push_back(e);
  }
  std::sort(tree.tree_edges.begin(), tree.tree_edges.end());
  TOmegaGauge g;
  g.selection = cotree_projector(m, tree, interior);
  g.pinned_node = tree.root;
  return g;
}

// A different A* gauge: Kruskal on the dual graph with the highest facets
// first; gauged facets are tree facets away from the conductor.
inline GaugeSelection alternative_astar_gauge(const FitModel& model) {
  const FitMesh& m = model.mesh;
  const auto cond = conducting_facets(m, model.map);
  const Index outside = m.n_cells();
  UnionFind uf(outside + 1);
  GaugeSelection g;
  std::vector<char> gauged(static_cast<std::size_t>(m.n_facets()), 0);
  // Conductor facets join the tree first so the gauged part stays outside it.
  for (int pass = 0; pass < 2; ++pass)
    for (Index f = m.n_facets() - 1; f >= 0; --f) {
      if ((cond[static_cast<std::size_t>(f)] != 0) != (pass == 0)) continue;
      const auto c = m.facet_cells(f);
      if (uf.join(c[0], c.size() == 2 ? c[1] : outside) && pass == 1) gauged[static_cast<std::size_t>(f)] = 1;
    }
  for (Index f = 0; f < m.n_facets(); ++f) (gauged[static_cast<std::size_t>(f)] ? g.tree : g.kept).push_back(f);
  g.P = selection_of(m.n_facets(), g.kept);
  return g;
}

inline Mat hstack_dense(std::initializer_list<Mat> blocks) {
  Index cols = 0, rows = blocks.begin()->rows();
  for (const Mat& b : blocks) cols += b.cols();
  Mat out(rows, cols);
  Index c = 0;
  for (const Mat& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

// T-Omega: differentiating the three block rows gives B^T M B z' = (-K t, 0, v)
// for z = (t, Psi, i) and B = [P S~^T Y], so di'/dv is the port block of
// (B^T M B)^{-1}.
inline Mat tomega_schur_oracle(const TOmegaElement& el, const Vec& mu) {
  const Mat b = hstack_dense({Mat(el.P()), Mat(el.St_t()), Mat(el.Y())});
  const Mat g = b.transpose() * mu.asDiagonal() * b;
  const Index np = el.Y().cols();
  const Mat inv = g.inverse();
  return inv.bottomRightCorner(np, np).inverse();
}

// A*: with the potential frozen on conducting facets, L = j^T K^+ j over the
// remaining facets, using the full ungauged curl-curl matrix.
inline Mat astar_pseudo_inverse_oracle(const FitModel& model) {
  const auto cf = conducting_facets(model.mesh, model.map);
  std::vector<Index> free;
  for (Index f = 0; f < model.mesh.n_facets(); ++f)
    if (!cf[static_cast<std::size_t>(f)]) free.push_back(f);
  const Mat c = Mat(model.ops.curl());
  const Mat k = c * model.mats.nu.asDiagonal() * c.transpose();
  const Mat j = Mat(model.windings.facet_current);
  const auto n = static_cast<Index>(free.size());
  Mat kk(n, n), jj(n, j.cols());
  for (Index a = 0; a < n; ++a) {
    jj.row(a) = j.row(free[static_cast<std::size_t>(a)]);
    for (Index b = 0; b < n; ++b) kk(a, b) = k(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
  }
  return jj.transpose() * Eigen::CompleteOrthogonalDecomposition<Mat>(kk).solve(jj);
}

// Largest observed convergence order over consecutive residual triples that
// stay above round-off. Only triples inside the contracting phase count, so a
// stalled line search step cannot fake a high order.
inline double newton_order(const std::vector<double>& r) {
  double best = 0.0;
  for (std::size_t k = 2; k < r.size(); ++k) {
    if (r[k] <= 1e-12 * r.front() || r[k - 1] > 0.1 * r[k - 2]) continue;
    best = std::max(best, std::log(r[k] / r[k - 1]) / std::log(r[k - 1] / r[k - 2]));
  }
  return best;
}

}  // namespace fcsim::test
