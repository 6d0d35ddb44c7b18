#include "fcsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace fcsim::topology {

namespace {

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), Index{0}); }
  Index find(Index a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<Index> parent_;
};

// Graph node id: row index, or n_e for ground.
Index gid(Index row, Index n_e) { return row < 0 ? n_e : row; }

Mat hcat(const std::vector<const Mat*>& ms, Index rows) {
  Index cols = 0;
  for (const auto* m : ms) cols += m->cols();
  Mat out(rows, cols);
  Index off = 0;
  for (const auto* m : ms) {
    out.middleCols(off, m->cols()) = *m;
    off += m->cols();
  }
  return out;
}

Mat image_basis(const Mat& q) {
  // Orthonormal basis of im(Q) for an orthogonal projector Q.
  if (q.rows() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  std::vector<Index> keep;
  for (Index k = 0; k < q.rows(); ++k)
    if (es.eigenvalues()(k) > 0.5) keep.push_back(k);
  Mat out(q.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
  return out;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += sep;
    out += v[k];
  }
  return out;
}

}  // namespace

const Mat& IncidenceBlocks::block(BranchKind kind) const {
  switch (kind) {
    case BranchKind::C: return C;
    case BranchKind::R: return R;
    case BranchKind::L: return L;
    case BranchKind::V: return V;
    case BranchKind::I: return I;
    case BranchKind::X: return lambda;
  }
  return R;
}

const std::vector<BranchColumn>& IncidenceBlocks::columns(BranchKind kind) const {
  switch (kind) {
    case BranchKind::C: return columns_C;
    case BranchKind::R: return columns_R;
    case BranchKind::L: return columns_L;
    case BranchKind::V: return columns_V;
    case BranchKind::I: return columns_I;
    case BranchKind::X: return columns_lambda;
  }
  return columns_R;
}

Mat IncidenceBlocks::full() const { return hcat({&C, &R, &L, &V, &I, &lambda}, n_e()); }

IncidenceBlocks incidence_blocks(const netlist::NetlistDocument& doc) {
  IncidenceBlocks b;
  b.ground = doc.ground;
  std::map<std::string, Index> row;
  for (const auto& n : doc.nodes) {
    if (n == doc.ground) continue;
    row[n] = static_cast<Index>(b.node_names.size());
    b.node_names.push_back(n);
  }
  auto row_of = [&](const std::string& n) -> Index { return n == doc.ground ? -1 : row.at(n); };

  auto columns_for = [&](BranchKind k) -> std::vector<BranchColumn>& {
    switch (k) {
      case BranchKind::C: return b.columns_C;
      case BranchKind::R: return b.columns_R;
      case BranchKind::L: return b.columns_L;
      case BranchKind::V: return b.columns_V;
      case BranchKind::I: return b.columns_I;
      case BranchKind::X: return b.columns_lambda;
    }
    return b.columns_R;
  };

  for (const auto& br : doc.branches) {
    const std::size_t ports = br.port_count();
    for (std::size_t p = 0; p < ports; ++p) {
      BranchColumn col;
      col.branch = br.name;
      col.name = ports == 1 ? br.name : br.name + "[" + std::to_string(p) + "]";
      col.kind = br.kind;
      col.plus = row_of(br.terminals[2 * p]);
      col.minus = row_of(br.terminals[2 * p + 1]);
      col.value = br.value;
      columns_for(br.kind).push_back(std::move(col));
    }
  }

  const Index n_e = b.n_e();
  auto build = [n_e](const std::vector<BranchColumn>& cols) {
    Mat m = Mat::Zero(n_e, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].plus >= 0) m(cols[c].plus, static_cast<Index>(c)) = 1.0;
      if (cols[c].minus >= 0) m(cols[c].minus, static_cast<Index>(c)) = -1.0;
    }
    return m;
  };
  b.C = build(b.columns_C);
  b.R = build(b.columns_R);
  b.L = build(b.columns_L);
  b.V = build(b.columns_V);
  b.I = build(b.columns_I);
  b.lambda = build(b.columns_lambda);

  UnionFind uf(n_e + 1);
  for (auto k : {BranchKind::C, BranchKind::R, BranchKind::L, BranchKind::V, BranchKind::I, BranchKind::X})
    for (const auto& c : b.columns(k)) uf.unite(gid(c.plus, n_e), gid(c.minus, n_e));
  for (Index r = 0; r < n_e; ++r)
    if (uf.find(r) != uf.find(n_e))
      throw TopologyError("graph disconnected from ground: node '" + b.node_names[r] + "' has no path to '" + b.ground + "'");
  return b;
}

Index Projector::rank() const {
  // The trace of an orthogonal projector equals its rank.
  return static_cast<Index>(std::llround(Q.trace()));
}

Projector kernel_projector(const Mat& m, std::string source) {
  Projector p;
  p.source = std::move(source);
  const Mat basis = left_null_space(m);
  const Index n = m.rows();
  p.Q = basis.cols() == 0 ? Mat::Zero(n, n) : Mat(basis * basis.transpose());
  return p;
}

WellPosedReport check_well_posed(const IncidenceBlocks& b) {
  WellPosedReport rep;
  const Index n_e = b.n_e();
  const Mat rcvll = hcat({&b.R, &b.C, &b.V, &b.L, &b.lambda}, n_e);
  if (numerical_rank(rcvll) != n_e) {
    rep.well_posed = false;
    rep.violations.emplace_back("cutset of current sources only: ker(A_R A_C A_V A_L A_lambda)^T != {0}");
  }
  if (numerical_rank(b.V) != b.V.cols()) {
    rep.well_posed = false;
    rep.violations.emplace_back("loop of voltage sources only: ker A_V != {0}");
  }
  for (auto k : {BranchKind::R, BranchKind::C, BranchKind::L}) {
    for (const auto& c : b.columns(k)) {
      if (!(c.value > 0.0)) {
        rep.well_posed = false;
        rep.violations.emplace_back("non-positive parameter on branch '" + c.name + "'");
      }
    }
  }
  return rep;
}

Index2Projectors index2_components(const IncidenceBlocks& b) {
  const Index n_e = b.n_e();
  Index2Projectors out;
  out.crv = kernel_projector(hcat({&b.C, &b.R, &b.V}, n_e), "C,R,V");
  const Projector qc = kernel_projector(b.C, "C");
  const Mat qcv = qc.Q.transpose() * b.V;  // n_e x n_V
  // ker(Q_C^T A_V) = ker(M^T) with M = (Q_C^T A_V)^T.
  out.v_c = kernel_projector(qcv.transpose(), "V-C");
  return out;
}

IndexReport classify_index(const IncidenceBlocks& b) {
  IndexReport rep;
  rep.well_posedness = check_well_posed(b);
  if (!rep.well_posedness.well_posed)
    throw TopologyError("circuit is not well posed: " + join(rep.well_posedness.violations, "; "));

  const Index n_e = b.n_e();

  // LI-lambda cutsets: components of the R/C/V subgraph that do not contain ground.
  {
    UnionFind uf(n_e + 1);
    for (auto k : {BranchKind::R, BranchKind::C, BranchKind::V})
      for (const auto& c : b.columns(k)) uf.unite(gid(c.plus, n_e), gid(c.minus, n_e));
    std::map<Index, std::vector<Index>> comps;
    for (Index r = 0; r < n_e; ++r)
      if (uf.find(r) != uf.find(n_e)) comps[uf.find(r)].push_back(r);
    for (const auto& [root, members] : comps) {
      std::vector<std::string> cut;
      for (auto k : {BranchKind::L, BranchKind::I, BranchKind::X}) {
        for (const auto& c : b.columns(k)) {
          const bool in_p = uf.find(gid(c.plus, n_e)) == root;
          const bool in_m = uf.find(gid(c.minus, n_e)) == root;
          if (in_p != in_m) cut.push_back(c.name);
        }
      }
      std::sort(cut.begin(), cut.end());
      rep.li_lambda_cutsets.push_back(std::move(cut));
    }
  }

  // CV loops: V columns (in name order) closing a loop over C plus previously accepted V.
  {
    struct Edge {
      Index a, b;
      std::string name;
    };
    std::vector<Edge> edges;
    UnionFind uf(n_e + 1);
    for (const auto& c : b.columns_C) {
      edges.push_back({gid(c.plus, n_e), gid(c.minus, n_e), c.name});
      uf.unite(gid(c.plus, n_e), gid(c.minus, n_e));
    }
    std::vector<const BranchColumn*> vs;
    for (const auto& c : b.columns_V) vs.push_back(&c);
    std::sort(vs.begin(), vs.end(), [](const auto* x, const auto* y) { return x->name < y->name; });
    for (const auto* v : vs) {
      const Index a = gid(v->plus, n_e);
      const Index z = gid(v->minus, n_e);
      if (uf.find(a) != uf.find(z)) {
        uf.unite(a, z);
        edges.push_back({a, z, v->name});
        continue;
      }
      // Breadth-first path a -> z over accepted edges, neighbours in branch-name order.
      std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(n_e + 1));
      for (std::size_t e = 0; e < edges.size(); ++e) {
        adj[edges[e].a].push_back(e);
        adj[edges[e].b].push_back(e);
      }
      for (auto& l : adj) std::sort(l.begin(), l.end(), [&](auto x, auto y) { return edges[x].name < edges[y].name; });
      std::vector<long> via(static_cast<std::size_t>(n_e + 1), -2);
      std::deque<Index> queue{a};
      via[a] = -1;
      while (!queue.empty()) {
        const Index u = queue.front();
        queue.pop_front();
        if (u == z) break;
        for (auto e : adj[u]) {
          const Index w = edges[e].a == u ? edges[e].b : edges[e].a;
          if (via[w] != -2) continue;
          via[w] = static_cast<long>(e);
          queue.push_back(w);
        }
      }
      std::vector<std::string> loop{v->name};
      for (Index u = z; u != a;) {
        const auto& e = edges[static_cast<std::size_t>(via[u])];
        loop.push_back(e.name);
        u = e.a == u ? e.b : e.a;
      }
      std::sort(loop.begin(), loop.end());
      rep.cv_loops.push_back(std::move(loop));
    }
  }

  const auto proj = index2_components(b);
  rep.index2_node_components = image_basis(proj.crv.Q);
  rep.index2_vsource_components = image_basis(proj.v_c.Q);
  if (rep.index2_node_components.cols() != static_cast<Index>(rep.li_lambda_cutsets.size()) ||
      rep.index2_vsource_components.cols() != static_cast<Index>(rep.cv_loops.size()))
    throw std::logic_error("topological witness count disagrees with projector rank");
  rep.index = (rep.li_lambda_cutsets.empty() && rep.cv_loops.empty()) ? 1 : 2;
  // Without sources of voltage, without field elements and with a capacitive
  // path from every node to ground no equation is algebraic: the system is an ODE.
  if (rep.index == 1 && b.V.cols() == 0 && b.lambda.cols() == 0 && numerical_rank(b.C) == n_e) rep.index = 0;
  return rep;
}

std::string IndexReport::to_text() const {
  std::ostringstream os;
  os << "differential index: " << index << '\n';
  os << "well posed: " << (well_posedness.well_posed ? "yes" : "no") << '\n';
  for (const auto& v : well_posedness.violations) os << "  violation: " << v << '\n';
  os << "LI-lambda cutsets: " << li_lambda_cutsets.size() << '\n';
  for (std::size_t k = 0; k < li_lambda_cutsets.size(); ++k)
    os << "  cutset " << k + 1 << ": " << join(li_lambda_cutsets[k], " ") << '\n';
  os << "CV loops: " << cv_loops.size() << '\n';
  for (std::size_t k = 0; k < cv_loops.size(); ++k) os << "  loop " << k + 1 << ": " << join(cv_loops[k], " ") << '\n';
  os << "index-2 node components (rank Q_CRV): " << index2_node_components.cols() << '\n';
  os << "index-2 voltage-source components (rank Qbar_V-C): " << index2_vsource_components.cols() << '\n';
  return os.str();
}

std::string IndexReport::to_key_value() const {
  std::ostringstream os;
  os << "index=" << index << '\n';
  os << "well_posed=" << (well_posedness.well_posed ? "true" : "false") << '\n';
  os << "violations=" << join(well_posedness.violations, ";") << '\n';
  os << "li_lambda_cutset_count=" << li_lambda_cutsets.size() << '\n';
  for (std::size_t k = 0; k < li_lambda_cutsets.size(); ++k)
    os << "li_lambda_cutset." << k + 1 << '=' << join(li_lambda_cutsets[k], ",") << '\n';
  os << "cv_loop_count=" << cv_loops.size() << '\n';
  for (std::size_t k = 0; k < cv_loops.size(); ++k) os << "cv_loop." << k + 1 << '=' << join(cv_loops[k], ",") << '\n';
  os << "rank_q_crv=" << index2_node_components.cols() << '\n';
  os << "rank_qbar_v_c=" << index2_vsource_components.cols() << '\n';
  return os.str();
}

}  // namespace fcsim::topology
