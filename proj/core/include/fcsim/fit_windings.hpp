#pragma once

// Stranded-coil winding functions on the FIT grid.
//
// A coil frame of width w and t layers is wound as w * t nested single-cell
// rings, each carrying N / (w t) of the turns. For unit coil current:
//   facet_current  facet currents of the winding (the discrete chi_s image)
//   Y              edge potential with C Y = facet_current (discrete zeta_s),
//                  supported on the axis-parallel edges spanning the ring holes

#include "fcsim/fit_mesh.hpp"

namespace fcsim::field {

struct WindingFunctions {
  SpMat facet_current;  // facets x n_s
  SpMat Y;              // edges x n_s
  Index n_coils() const { return Y.cols(); }
};

/// Throws FieldSpecError when a coil overlaps the conductor or another coil.
WindingFunctions build_windings(const FitMesh& mesh, const FieldSpec& spec);

/// Facet currents obtained by walking each ring counterclockwise about the
/// coil axis, independent of Y.
SpMat winding_facet_currents(const FitMesh& mesh, const CoilSpec& coil);

/// Edge potential Y for one coil.
SpMat winding_edge_potential(const FitMesh& mesh, const CoilSpec& coil);

/// Cells of the winding region.
std::vector<Index> coil_cells(const FitMesh& mesh, const CoilSpec& coil);

}  // namespace fcsim::field
