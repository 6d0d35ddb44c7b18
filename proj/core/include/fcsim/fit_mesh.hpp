#pragma once

// Structured hexahedral FIT grid and its incidence operators.
//
// Indexing (nx, ny, nz cells):
//   node (i,j,k)          i + (nx+1) * (j + (ny+1) * k)
//   edges                 x-edges, then y-edges, then z-edges; each block in
//                         lexicographic (i fastest) order of its lower node
//   facets                x-normal, then y-normal, then z-normal facets; each
//                         block in lexicographic order of its lower node
//   cell (i,j,k)          i + nx * (j + ny * k)
//
// Orientations follow the positive coordinate direction; facet circulation is
// right-handed about the facet normal.

#include "fcsim/field_spec.hpp"
#include "fcsim/linalg.hpp"

#include <array>

namespace fcsim::field {

class FitMesh {
 public:
  FitMesh(int nx, int ny, int nz, double dx = 1.0, double dy = 1.0, double dz = 1.0);
  explicit FitMesh(const FieldSpec& spec) : FitMesh(spec.nx, spec.ny, spec.nz, spec.dx, spec.dy, spec.dz) {}

  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  int n(int d) const { return n_[d]; }
  double spacing(int d) const { return h_[d]; }

  Index n_nodes() const;
  Index n_edges() const;
  Index n_facets() const;
  Index n_cells() const;

  Index node(int i, int j, int k) const;
  Index cell(int i, int j, int k) const;
  /// Edge of direction d starting at node (i,j,k).
  Index edge(int d, int i, int j, int k) const;
  /// Facet with normal d whose lowest node is (i,j,k).
  Index facet(int d, int i, int j, int k) const;

  std::array<int, 3> node_ijk(Index n) const;
  std::array<int, 3> cell_ijk(Index c) const;
  /// Direction and lower node of an edge / facet.
  std::pair<int, std::array<int, 3>> edge_ijk(Index e) const;
  std::pair<int, std::array<int, 3>> facet_ijk(Index f) const;

  bool valid_cell(int i, int j, int k) const;

  /// Up to four cells sharing an edge.
  std::vector<Index> edge_cells(Index e) const;
  /// One or two cells sharing a facet.
  std::vector<Index> facet_cells(Index f) const;
  /// True if the edge lies on the outer boundary of the grid.
  bool boundary_edge(Index e) const;
  bool boundary_facet(Index f) const;
  bool boundary_node(Index n) const;

  double edge_length(Index e) const;
  double facet_area(Index f) const;
  /// Area of the dual facet piercing edge e, clipped to the domain.
  double dual_area(Index e) const;
  /// Length of the dual edge through facet f, clipped to the domain.
  double dual_length(Index f) const;
  double cell_volume() const { return h_[0] * h_[1] * h_[2]; }

 private:
  std::array<int, 3> n_;
  std::array<double, 3> h_;
  std::array<Index, 3> edge_off_, facet_off_;
  std::array<std::array<int, 3>, 3> edge_dims_, facet_dims_;
};

/// Integer incidence matrices: gradient G (edges x nodes), curl C
/// (facets x edges) and divergence S (cells x facets). C G = 0 and S C = 0.
struct DiscreteOperators {
  SpMatI G, C, S;

  SpMat grad() const { return G.cast<double>(); }
  SpMat curl() const { return C.cast<double>(); }
  SpMat div() const { return S.cast<double>(); }
};

DiscreteOperators build_operators(const FitMesh& mesh);

/// S-tilde transposed: the negative gradient with the column of the pinned
/// node removed, so it has full column rank.
SpMatI reduced_dual_divergence_t(const DiscreteOperators& ops, Index pinned_node);

}  // namespace fcsim::field
