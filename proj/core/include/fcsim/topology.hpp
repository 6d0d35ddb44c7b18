#pragma once

// Reduced incidence blocks, kernel projectors, well-posedness checks and the
// topological DAE index classification of MNA circuits with inductance-like
// elements.

#include "fcsim/linalg.hpp"
#include "fcsim/netlist.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fcsim::topology {

using netlist::BranchKind;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One incidence column: a two-terminal branch or one port of an X element.
struct BranchColumn {
  std::string name;  // branch name, "<X>[p]" for port p > 0 of a multi-port X
  std::string branch;
  BranchKind kind = BranchKind::R;
  Index plus = -1;   // row of node_plus, -1 for ground
  Index minus = -1;  // row of node_minus, -1 for ground
  double value = 0.0; // R, C, L only
};

struct IncidenceBlocks {
  std::vector<std::string> node_names;  // non-ground nodes, row order
  std::string ground;
  Mat C, R, L, V, I, lambda;            // n_e rows each
  std::vector<BranchColumn> columns_C, columns_R, columns_L, columns_V, columns_I, columns_lambda;

  Index n_e() const { return static_cast<Index>(node_names.size()); }
  const Mat& block(BranchKind kind) const;
  const std::vector<BranchColumn>& columns(BranchKind kind) const;
  /// [A_C A_R A_L A_V A_I A_lambda]
  Mat full() const;
};

IncidenceBlocks incidence_blocks(const netlist::NetlistDocument& doc);

struct Projector {
  Mat Q;               // orthogonal projector onto ker(M^T)
  std::string source;  // which block(s) it annihilates
  Mat P() const { return Mat::Identity(Q.rows(), Q.cols()) - Q; }
  Index rank() const;
};

/// Orthogonal projector onto ker(M^T); zero matrix -> identity.
Projector kernel_projector(const Mat& m, std::string source = {});

struct WellPosedReport {
  bool well_posed = true;
  std::vector<std::string> violations;
};

WellPosedReport check_well_posed(const IncidenceBlocks& b);

struct IndexReport {
  int index = 1;
  WellPosedReport well_posedness;
  /// One entry per basis vector of ker(A_R A_C A_V)^T: the incident L/I/lambda columns.
  std::vector<std::vector<std::string>> li_lambda_cutsets;
  /// One entry per independent CV loop: its V and C columns.
  std::vector<std::vector<std::string>> cv_loops;
  Mat index2_node_components;     // basis of im(Q_CRV)
  Mat index2_vsource_components;  // basis of im(Qbar_{V-C})

  std::string to_text() const;
  std::string to_key_value() const;
};

/// Topological classification: index 1 iff ker(A_R A_C A_V)^T = {0} and
/// ker(Q_C^T A_V) = {0}, else 2 with witnesses. Index 0 is reported when no
/// equation is algebraic (no V, no X and A_C of full row rank). Throws TopologyError when the
/// circuit is not well posed.
IndexReport classify_index(const IncidenceBlocks& b);

struct Index2Projectors {
  Projector crv;  // n_e x n_e, onto ker(A_C A_R A_V)^T
  Projector v_c;  // n_V x n_V, onto ker(Q_C^T A_V)
};

Index2Projectors index2_components(const IncidenceBlocks& b);

}  // namespace fcsim::topology
