#include "fcsim/gauge.hpp"

#include <Eigen/SparseQR>

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <limits>
#include <set>
#include <sstream>

namespace fcsim::field {

namespace {

std::vector<Index> cell_edges(const FitMesh& mesh, Index c) {
  const auto p = mesh.cell_ijk(c);
  std::vector<Index> out;
  for (int d = 0; d < 3; ++d) {
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    for (int b = 0; b <= 1; ++b) {
      for (int a = 0; a <= 1; ++a) {
        auto q = p;
        q[d1] += a;
        q[d2] += b;
        out.push_back(mesh.edge(d, q[0], q[1], q[2]));
      }
    }
  }
  return out;
}

std::vector<Index> cell_nodes(const FitMesh& mesh, Index c) {
  const auto p = mesh.cell_ijk(c);
  std::vector<Index> out;
  for (int k = 0; k <= 1; ++k)
    for (int j = 0; j <= 1; ++j)
      for (int i = 0; i <= 1; ++i) out.push_back(mesh.node(p[0] + i, p[1] + j, p[2] + k));
  return out;
}

std::vector<Index> cell_facets(const FitMesh& mesh, Index c) {
  const auto p = mesh.cell_ijk(c);
  std::vector<Index> out;
  for (int d = 0; d < 3; ++d) {
    auto q = p;
    out.push_back(mesh.facet(d, q[0], q[1], q[2]));
    ++q[d];
    out.push_back(mesh.facet(d, q[0], q[1], q[2]));
  }
  return out;
}

template <class F>
std::vector<Index> collect(const FitMesh& mesh, const std::vector<Index>& cells, F per_cell) {
  std::set<Index> s;
  for (Index c : cells)
    for (Index x : per_cell(mesh, c)) s.insert(x);
  return {s.begin(), s.end()};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Index sparse_rank(const SpMat& m) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  SpMat c = m;
  c.makeCompressed();
  Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr(c);
  return qr.rank();
}

}  // namespace

std::vector<Index> region_nodes(const FitMesh& mesh, const std::vector<Index>& cells) { return collect(mesh, cells, cell_nodes); }
std::vector<Index> region_edges(const FitMesh& mesh, const std::vector<Index>& cells) { return collect(mesh, cells, cell_edges); }

std::vector<Index> interior_edges(const FitMesh& mesh, const std::vector<Index>& cells) {
  const std::set<Index> in(cells.begin(), cells.end());
  std::vector<Index> out;
  for (Index e : region_edges(mesh, cells)) {
    const auto adj = mesh.edge_cells(e);
    if (adj.size() == 4 && std::all_of(adj.begin(), adj.end(), [&](Index c) { return in.count(c) > 0; })) out.push_back(e);
  }
  return out;
}

void check_simply_connected(const FitMesh& mesh, const std::vector<Index>& cells) {
  if (cells.empty()) return;
  const std::set<Index> in(cells.begin(), cells.end());

  // Face connectivity of the region.
  {
    std::set<Index> seen{cells.front()};
    std::deque<Index> q{cells.front()};
    while (!q.empty()) {
      const Index c = q.front();
      q.pop_front();
      const auto p = mesh.cell_ijk(c);
      for (int d = 0; d < 3; ++d) {
        for (int s : {-1, 1}) {
          auto r = p;
          r[d] += s;
          if (!mesh.valid_cell(r[0], r[1], r[2])) continue;
          const Index nb = mesh.cell(r[0], r[1], r[2]);
          if (in.count(nb) && seen.insert(nb).second) q.push_back(nb);
        }
      }
    }
    if (seen.size() != in.size()) throw GaugeError("region is not connected");
  }

  // No cavities: the complement is connected inside a grid padded by one layer.
  {
    const int px = mesh.nx() + 2, py = mesh.ny() + 2, pz = mesh.nz() + 2;
    auto pid = [&](int i, int j, int k) { return static_cast<std::size_t>(i + px * (j + py * k)); };
    auto occupied = [&](int i, int j, int k) {
      if (i == 0 || j == 0 || k == 0 || i == px - 1 || j == py - 1 || k == pz - 1) return false;
      return in.count(mesh.cell(i - 1, j - 1, k - 1)) > 0;
    };
    std::vector<char> seen(static_cast<std::size_t>(px) * py * pz, 0);
    std::deque<std::array<int, 3>> q{{0, 0, 0}};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
      const auto p = q.front();
      q.pop_front();
      for (int d = 0; d < 3; ++d) {
        for (int s : {-1, 1}) {
          auto r = p;
          r[d] += s;
          if (r[0] < 0 || r[1] < 0 || r[2] < 0 || r[0] >= px || r[1] >= py || r[2] >= pz) continue;
          if (occupied(r[0], r[1], r[2]) || seen[pid(r[0], r[1], r[2])]) continue;
          seen[pid(r[0], r[1], r[2])] = 1;
          ++reached;
          q.push_back(r);
        }
      }
    }
    const std::size_t complement = static_cast<std::size_t>(px) * py * pz - in.size();
    if (reached != complement) throw GaugeError("region encloses a cavity");
  }

  const auto v = static_cast<long>(region_nodes(mesh, cells).size());
  const auto e = static_cast<long>(region_edges(mesh, cells).size());
  const auto f = static_cast<long>(collect(mesh, cells, cell_facets).size());
  const auto c = static_cast<long>(cells.size());
  const long chi = v - e + f - c;
  if (chi != 1)
    throw GaugeError("region not simply connected (Euler characteristic " + std::to_string(chi) + ", cycle rank " +
                     std::to_string(1 - chi) + ")");
}

SpanningTree spanning_tree(const FitMesh& mesh, const std::vector<Index>& cells, bool require_simply_connected) {
  SpanningTree t;
  if (cells.empty()) return t;
  if (require_simply_connected) check_simply_connected(mesh, cells);
  t.nodes = region_nodes(mesh, cells);
  t.edges = region_edges(mesh, cells);
  t.root = t.nodes.front();

  const auto interior = interior_edges(mesh, cells);
  const std::set<Index> interior_set(interior.begin(), interior.end());

  // Incident region edges per node, ascending edge index.
  std::map<Index, std::vector<Index>> incident;
  for (Index e : t.edges) {
    const auto [d, p] = mesh.edge_ijk(e);
    auto q = p;
    ++q[d];
    incident[mesh.node(p[0], p[1], p[2])].push_back(e);
    incident[mesh.node(q[0], q[1], q[2])].push_back(e);
  }
  auto other = [&](Index e, Index n) {
    const auto [d, p] = mesh.edge_ijk(e);
    const Index a = mesh.node(p[0], p[1], p[2]);
    auto q = p;
    ++q[d];
    const Index b = mesh.node(q[0], q[1], q[2]);
    return n == a ? b : a;
  };

  constexpr long inf = std::numeric_limits<long>::max();
  std::map<Index, long> dist;
  std::map<Index, Index> via;
  std::set<Index> done;
  for (Index n : t.nodes) dist[n] = inf;
  dist[t.root] = 0;
  std::deque<Index> dq{t.root};
  while (!dq.empty()) {
    const Index u = dq.front();
    dq.pop_front();
    if (!done.insert(u).second) continue;
    for (Index e : incident[u]) {
      const Index w = other(e, u);
      const long cost = interior_set.count(e) ? 1 : 0;
      if (dist[u] + cost < dist[w]) {
        dist[w] = dist[u] + cost;
        via[w] = e;
        if (cost == 0) dq.push_front(w);
        else dq.push_back(w);
      }
    }
  }
  if (done.size() != t.nodes.size()) throw GaugeError("region is not connected");
  for (const auto& [n, e] : via) t.tree_edges.push_back(e);
  std::sort(t.tree_edges.begin(), t.tree_edges.end());
  return t;
}

GaugeSelection cotree_projector(const FitMesh& mesh, const SpanningTree& tree, const std::vector<Index>& region_edge_set) {
  GaugeSelection g;
  const std::set<Index> in_tree(tree.tree_edges.begin(), tree.tree_edges.end());
  std::set<Index> edges(region_edge_set.begin(), region_edge_set.end());
  for (Index e : edges) {
    if (in_tree.count(e)) g.tree.push_back(e);
    else g.kept.push_back(e);
  }
  g.P = selection_matrix(mesh.n_edges(), g.kept);
  return g;
}

TOmegaGauge tomega_gauge(const FitMesh& mesh, const MaterialMap& map, bool require_simply_connected) {
  std::vector<Index> cells;
  for (Index c = 0; c < mesh.n_cells(); ++c)
    if (map.conducting(c)) cells.push_back(c);
  TOmegaGauge g;
  if (cells.empty()) {
    g.selection.P = SpMat(mesh.n_edges(), 0);
    g.pinned_node = 0;
    return g;
  }
  const SpanningTree tree = spanning_tree(mesh, cells, require_simply_connected);
  g.selection = cotree_projector(mesh, tree, interior_edges(mesh, cells));
  g.pinned_node = tree.root;
  return g;
}

std::vector<char> conducting_facets(const FitMesh& mesh, const MaterialMap& map) {
  std::vector<char> out(static_cast<std::size_t>(mesh.n_facets()), 0);
  for (Index f = 0; f < mesh.n_facets(); ++f)
    for (Index c : mesh.facet_cells(f))
      if (map.conducting(c)) out[static_cast<std::size_t>(f)] = 1;
  return out;
}

GaugeSelection astar_gauge(const FitMesh& mesh, const MaterialMap& map) {
  const Index outside = mesh.n_cells();
  const auto cond = conducting_facets(mesh, map);

  // Union-find over the dual nodes (cells plus the exterior).
  std::vector<Index> parent(static_cast<std::size_t>(outside + 1));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto join = [&](Index f) {
    const auto cells = mesh.facet_cells(f);
    const Index a = find(cells[0]);
    const Index b = find(cells.size() == 2 ? cells[1] : outside);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  };

  // Facets next to a conductor join the tree first; the remaining tree facets
  // connect the conductor clusters and are the gauged ones.
  for (Index f = 0; f < mesh.n_facets(); ++f)
    if (cond[static_cast<std::size_t>(f)]) join(f);
  GaugeSelection g;
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    if (!cond[static_cast<std::size_t>(f)] && join(f)) g.tree.push_back(f);
    else g.kept.push_back(f);
  }
  g.P = selection_matrix(mesh.n_facets(), g.kept);
  return g;
}

void GaugeReport::add(const std::string& name, bool pass, const std::string& detail) {
  ok = ok && pass;
  checks.push_back(name + ": " + (pass ? "pass" : "fail") + (detail.empty() ? "" : " (" + detail + ")"));
}

GaugeReport verify_gauge_tomega(const DiscreteOperators& ops, const MaterialMatrices& mats, const SpMat& P, const SpMat& st_t) {
  GaugeReport rep;
  const SpMat cp = ops.curl() * P;
  const Mat k_rho = Mat(SpMat(cp.transpose() * MaterialMatrices::diag(mats.rho) * cp));
  if (k_rho.rows() == 0) {
    rep.add("K_rho full rank", true, "no conductor unknowns");
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(k_rho, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(es.eigenvalues().size() - 1);
    const bool pass = lo > static_cast<double>(k_rho.rows()) * 1e-12 * hi;
    rep.add("K_rho full rank", pass, "eigenvalue ratio " + fmt(hi > 0 ? lo / hi : 0.0));
  }
  const SpMat both = hstack({&P, &st_t});
  const Index rp = sparse_rank(P), rs = sparse_rank(st_t), rb = sparse_rank(both);
  rep.add("cotree fields are not gradients", rb == rp + rs,
          "rank [P S~^T] = " + std::to_string(rb) + ", rank P + rank S~^T = " + std::to_string(rp + rs));
  rep.add("S~^T full column rank", rs == st_t.cols(), "rank " + std::to_string(rs) + " of " + std::to_string(st_t.cols()));
  return rep;
}

GaugeReport verify_gauge_astar(const DiscreteOperators& ops, const MaterialMatrices& mats, const SpMat& P) {
  GaugeReport rep;
  const SpMat ctp = SpMat(ops.curl().transpose()) * P;
  const Mat k = Mat(SpMat(ctp.transpose() * MaterialMatrices::diag(mats.nu) * ctp));
  const Mat m = Mat(SpMat(P.transpose() * MaterialMatrices::diag(mats.sigma) * P));
  if (k.rows() == 0) {
    rep.add("M_sigma + K_nu positive definite", true, "no unknowns");
    return rep;
  }
  // Symmetric diagonal scaling; definiteness is invariant under congruence.
  Vec d = (k.diagonal() + m.diagonal()).cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const Mat ks = d.asDiagonal() * k * d.asDiagonal();
  const Mat ms = d.asDiagonal() * m * d.asDiagonal();
  const double tol = static_cast<double>(k.rows()) * 1e-12;
  Eigen::SelfAdjointEigenSolver<Mat> ek(ks, Eigen::EigenvaluesOnly), em(ms, Eigen::EigenvaluesOnly), es(Mat(ks + ms), Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().maxCoeff();
  rep.add("K_nu positive semidefinite", ek.eigenvalues()(0) >= -tol * scale, "min eigenvalue " + fmt(ek.eigenvalues()(0)));
  rep.add("M_sigma positive semidefinite", em.eigenvalues()(0) >= -tol * scale, "min eigenvalue " + fmt(em.eigenvalues()(0)));
  rep.add("M_sigma + K_nu positive definite", es.eigenvalues()(0) > tol * scale, "min eigenvalue " + fmt(es.eigenvalues()(0)));
  return rep;
}

}  // namespace fcsim::field
