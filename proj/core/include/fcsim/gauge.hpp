#pragma once

// Tree-cotree gauging on the FIT grid.

#include "fcsim/fit_materials.hpp"
#include "fcsim/fit_mesh.hpp"

#include <stdexcept>
#include <string>

namespace fcsim::field {

class GaugeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpanningTree {
  Index root = -1;               // lowest-index node of the region
  std::vector<Index> nodes;      // region nodes, ascending
  std::vector<Index> edges;      // all edges of the closed region, ascending
  std::vector<Index> tree_edges; // ascending
};

/// Nodes and edges of the closed cell region.
std::vector<Index> region_nodes(const FitMesh& mesh, const std::vector<Index>& cells);
std::vector<Index> region_edges(const FitMesh& mesh, const std::vector<Index>& cells);
/// Region edges whose four adjacent cells all belong to the region.
std::vector<Index> interior_edges(const FitMesh& mesh, const std::vector<Index>& cells);

/// Throws GaugeError unless the region is face-connected, has no cavity and
/// its Euler characteristic V - E + F - C equals 1.
void check_simply_connected(const FitMesh& mesh, const std::vector<Index>& cells);

/// Breadth-first spanning tree of the region's edge graph, rooted at the
/// lowest-index region node. Edges on the region surface cost 0 and interior
/// edges 1, so the surface is spanned first; ties go to the lower edge index.
/// `require_simply_connected` applies check_simply_connected first.
SpanningTree spanning_tree(const FitMesh& mesh, const std::vector<Index>& cells, bool require_simply_connected = true);

struct GaugeSelection {
  std::vector<Index> tree;     // gauged (zeroed) dofs
  std::vector<Index> kept;     // remaining dofs, ascending; column order of P
  SpMat P;                     // all dofs x kept
};

/// Selection of the region edges not in the tree.
GaugeSelection cotree_projector(const FitMesh& mesh, const SpanningTree& tree, const std::vector<Index>& region_edge_set);

/// T-Omega gauge: cotree edges among the interior conductor edges. Also returns
/// the tree root, which is the node where the scalar potential is pinned.
struct TOmegaGauge {
  GaugeSelection selection;
  Index pinned_node = 0;
};
TOmegaGauge tomega_gauge(const FitMesh& mesh, const MaterialMap& map, bool require_simply_connected = true);

/// A* gauge on the dual grid: the unknowns live on primal facets (dual edges).
/// A spanning tree of the dual graph (cells plus one exterior node) is built
/// with Kruskal's rule, taking facets next to conducting cells first and then
/// the rest in ascending order; its facets that do not touch a conductor are
/// gauged.
GaugeSelection astar_gauge(const FitMesh& mesh, const MaterialMap& map);

/// Facets touching at least one conducting cell.
std::vector<char> conducting_facets(const FitMesh& mesh, const MaterialMap& map);

struct GaugeReport {
  bool ok = true;
  std::vector<std::string> checks;  // "name: pass|fail (detail)"
  void add(const std::string& name, bool pass, const std::string& detail = {});
};

/// Full rank of K_rho = P^T C^T M_rho C P, and rank [P | S~^T] = rank P + rank S~^T.
GaugeReport verify_gauge_tomega(const DiscreteOperators& ops, const MaterialMatrices& mats, const SpMat& P, const SpMat& st_t);

/// Positive definiteness of M_sigma_bar + K_nu_bar on the kept facets, with
/// each term positive semidefinite.
GaugeReport verify_gauge_astar(const DiscreteOperators& ops, const MaterialMatrices& mats, const SpMat& P);

}  // namespace fcsim::field
