#pragma once

// A discretized field problem: grid, operators, materials and windings.

#include "fcsim/fit_materials.hpp"
#include "fcsim/fit_mesh.hpp"
#include "fcsim/fit_windings.hpp"

namespace fcsim::field {

struct FitModel {
  FieldSpec spec;
  FitMesh mesh;
  DiscreteOperators ops;
  MaterialMap map;
  MaterialMatrices mats;
  WindingFunctions windings;

  static FitModel build(const FieldSpec& spec);
  Index n_coils() const { return windings.n_coils(); }
};

/// Symmetric port inductance matrix of a field element.
struct LLambda {
  Mat L;
  std::string formulation;
  double min_eigenvalue = 0.0;
  bool spd() const { return min_eigenvalue > 0.0; }
};

struct HelmholtzSplit {
  Vec x1;  // scalar potential part, one entry per column of S~^T
  Vec x2;  // facet part
  double residual = 0.0;  // ||x - S~^T x1 - M_mu^-1 C^T x2|| / ||x||
};

/// Least-squares split x = S~^T x1 + M_mu^{-1} C^T x2.
HelmholtzSplit helmholtz_split(const Vec& x, const DiscreteOperators& ops, const SpMat& st_t, const Vec& mu);

}  // namespace fcsim::field
