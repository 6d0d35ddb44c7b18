#include "fcsim/solver.hpp"

#include <Eigen/SparseLU>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fcsim {

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed t0");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be at least 1");
  if (init_mode == InitMode::TwoStepWarmup && !(warmup_span > 0.0)) throw std::invalid_argument("warmup_span must be positive");
}

const std::vector<double>& TimeSeries::column(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return columns[k];
  throw std::out_of_range("no output column '" + name + "'");
}

namespace {

void write_double(std::ostream& os, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

void write_field(std::ostream& os, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    os << s;
    return;
  }
  os << '"';
  for (char c : s) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

}  // namespace

void TimeSeries::write_csv(std::ostream& os) const {
  os << "time";
  for (const auto& n : names) {
    os << ',';
    write_field(os, n);
  }
  os << "\r\n";
  for (std::size_t r = 0; r < times.size(); ++r) {
    write_double(os, times[r]);
    for (const auto& c : columns) {
      os << ',';
      write_double(os, c[r]);
    }
    os << "\r\n";
  }
}

void TimeSeries::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------

namespace {

/// Row and column scalings making every row and column of m have unit
/// max-norm (two alternating sweeps).
void equilibration(const SpMat& m, Vec& row, Vec& col) {
  row = Vec::Ones(m.rows());
  col = Vec::Ones(m.cols());
  for (int sweep = 0; sweep < 2; ++sweep) {
    Vec rmax = Vec::Zero(m.rows());
    for (Index k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        rmax(it.row()) = std::max(rmax(it.row()), std::abs(row(it.row()) * it.value() * col(it.col())));
    for (Index r = 0; r < m.rows(); ++r)
      if (rmax(r) > 0) row(r) /= rmax(r);
    Vec cmax = Vec::Zero(m.cols());
    for (Index k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        cmax(it.col()) = std::max(cmax(it.col()), std::abs(row(it.row()) * it.value() * col(it.col())));
    for (Index c = 0; c < m.cols(); ++c)
      if (cmax(c) > 0) col(c) /= cmax(c);
  }
}

constexpr Index dense_limit = 500;

}  // namespace

struct ImplicitEuler::Factorization {
  Vec row, col;
  bool dense = true;
  Eigen::PartialPivLU<Mat> lu;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> slu;

  Vec solve(const Vec& rhs) {
    const Vec b = row.cwiseProduct(rhs);
    const Vec y = dense ? Vec(lu.solve(b)) : Vec(slu.solve(b));
    return col.cwiseProduct(y);
  }
};

ImplicitEuler::ImplicitEuler(const CoupledDaeSystem& sys, double newton_tol, int newton_max_iter)
    : sys_(sys), tol_(newton_tol), max_iter_(newton_max_iter) {}

std::shared_ptr<ImplicitEuler::Factorization> ImplicitEuler::factor(const SpMat& j) const {
  auto f = std::make_shared<Factorization>();
  equilibration(j, f->row, f->col);
  SpMat js = f->row.asDiagonal() * j * f->col.asDiagonal();
  const char* hint =
      "singular iteration matrix: the DAE has index > 2, a floating subnetwork, or an incomplete gauge";
  if (j.rows() < dense_limit) {
    f->dense = true;
    const Mat d(js);
    f->lu.compute(d);
    const double rc = f->lu.rcond();
    if (!(rc > 1e3 * std::numeric_limits<double>::epsilon())) {
      std::ostringstream os;
      os << hint << " (reciprocal condition " << rc << ")";
      throw SolverError(os.str());
    }
  } else {
    f->dense = false;
    js.makeCompressed();
    f->slu.compute(js);
    if (f->slu.info() != Eigen::Success) throw SolverError(std::string(hint) + " (" + f->slu.lastErrorMessage() + ")");
  }
  return f;
}

Vec ImplicitEuler::step(const Vec& x_prev, double t_next, double dt, NewtonHistory* history) {
  const Index n = sys_.size();
  Vec x = x_prev;
  const bool linear = sys_.is_linear();
  auto scaled_norm = [](const std::shared_ptr<Factorization>& f, const Vec& r) { return f->row.cwiseProduct(r).lpNorm<Eigen::Infinity>(); };

  if (linear) {
    if (!cached_ || std::abs(dt - cached_dt_) > 1e-9 * cached_dt_) {
      auto [e, a] = linearize(sys_, x_prev, t_next);
      cached_ = factor(SpMat(e / dt + a));
      cached_dt_ = dt;
    }
    const Vec r0 = sys_.residual(Vec::Zero(n), x, t_next);
    x -= cached_->solve(r0);
    if (history) {
      history->residual_norms = {scaled_norm(cached_, r0), scaled_norm(cached_, sys_.residual((x - x_prev) / dt, x, t_next))};
      history->iterations = 1;
    }
    return x;
  }

  if (history) *history = {};
  double r_first = 0.0;
  // Row scaling of the first iteration matrix, kept for every iterate so the
  // residual norms are comparable.
  Vec row;
  for (int it = 0; it <= max_iter_; ++it) {
    const Vec xdot = (x - x_prev) / dt;
    const Vec r = sys_.residual(xdot, x, t_next);
    if (!r.allFinite()) {
      std::ostringstream os;
      os << "Newton produced a non-finite residual at t = " << t_next;
      throw SolverError(os.str());
    }
    SpMat e, a;
    sys_.jacobians(xdot, x, t_next, e, a);
    const auto f = factor(SpMat(e / dt + a));
    if (it == 0) row = f->row;
    const double rn = row.cwiseProduct(r).lpNorm<Eigen::Infinity>();
    if (history) history->residual_norms.push_back(rn);
    if (it == 0) r_first = rn;
    if (rn <= tol_ * std::max(r_first, std::numeric_limits<double>::min()) || rn == 0.0) return x;
    if (it == max_iter_) break;
    const Vec delta = f->solve(r);
    // Backtracking on the scaled residual keeps saturating materials from
    // overshooting; near the solution the full step is always taken.
    double lambda = 1.0;
    for (int cut = 0; cut < 12; ++cut, lambda *= 0.5) {
      const Vec trial = x - lambda * delta;
      const Vec rt = sys_.residual((trial - x_prev) / dt, trial, t_next);
      if (rt.allFinite() && row.cwiseProduct(rt).lpNorm<Eigen::Infinity>() <= (1.0 - 1e-4 * lambda) * rn) break;
    }
    x -= lambda * delta;
    if (history) history->iterations = it + 1;
    if (delta.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) return x;
  }
  std::ostringstream os;
  os << "Newton did not converge at t = " << t_next << " after " << max_iter_ << " iterations (scaled residual "
     << (history && !history->residual_norms.empty() ? history->residual_norms.back() : r_first) << ")";
  throw SolverError(os.str());
}

std::pair<SpMat, SpMat> linearize(const CoupledDaeSystem& sys, const Vec& x, double t) {
  SpMat e, a;
  sys.jacobians(Vec::Zero(sys.size()), x, t, e, a);
  return {e, a};
}

// ---------------------------------------------------------------------------

namespace {

struct AlgebraicSplit {
  Mat k;  // differential-free directions: ker E
  Mat z;  // constraint rows: left kernel of E
};

AlgebraicSplit algebraic_split(const SpMat& e, const SpMat& a) {
  SpMat both = hstack({&e, &a});
  Vec row, col;
  equilibration(both, row, col);
  // Column scaling of E taken from the E half only.
  Vec ecol = Vec::Ones(e.cols());
  const Mat es0 = row.asDiagonal() * Mat(e);
  for (Index c = 0; c < e.cols(); ++c) {
    const double m = es0.col(c).cwiseAbs().maxCoeff();
    if (m > 0) ecol(c) = 1.0 / m;
  }
  const Mat es = es0 * ecol.asDiagonal();
  AlgebraicSplit s;
  s.k = ecol.asDiagonal() * null_space(es);
  s.z = row.asDiagonal() * left_null_space(es);
  return s;
}

}  // namespace

double algebraic_residual(const CoupledDaeSystem& sys, const Vec& x, double t) {
  const auto [e, a] = linearize(sys, x, t);
  const AlgebraicSplit s = algebraic_split(e, a);
  if (s.z.cols() == 0) return 0.0;
  const Vec zero = Vec::Zero(sys.size());
  const Vec f = sys.residual(zero, zero, t);
  const Vec r = sys.residual(zero, x, t);
  const Mat zt = s.z.transpose();
  const double num = (zt * r).norm();
  const double den = (zt * Mat(a)).norm() * x.norm() + (zt * f).norm();
  return den > 0 ? num / den : num;
}

Vec consistent_init(const CoupledDaeSystem& sys, const SolverConfig& cfg) {
  cfg.validate();
  const Index n = sys.size();
  if (cfg.init_mode == InitMode::TwoStepWarmup) {
    ImplicitEuler ie(sys, cfg.newton_tol, cfg.newton_max_iter);
    const double h = 0.5 * cfg.warmup_span;
    Vec x = Vec::Zero(n);
    x = ie.step(x, cfg.t0 - h, h);
    x = ie.step(x, cfg.t0, h);
    return x;
  }

  Vec x = cfg.initial_guess.size() ? cfg.initial_guess : Vec(Vec::Zero(n));
  if (x.size() != n) throw std::invalid_argument("initial guess has the wrong size");
  const Vec zero = Vec::Zero(n);
  double r_first = -1.0;
  for (int it = 0; it <= cfg.newton_max_iter; ++it) {
    const auto [e, a] = linearize(sys, x, cfg.t0);
    const AlgebraicSplit s = algebraic_split(e, a);
    if (s.z.cols() == 0) return x;
    const Vec r = s.z.transpose() * sys.residual(zero, x, cfg.t0);
    const double rn = r.norm();
    if (r_first < 0) r_first = rn;
    if (rn <= cfg.newton_tol * std::max(r_first, 1e-300) || rn == 0.0) return x;
    const Mat m = s.z.transpose() * Mat(a) * s.k;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(m);
    const Vec d = cod.solve(-r);
    const Vec rr = m * d + r;
    if (rr.norm() > 1e-8 * std::max(rn, 1e-300))
      throw SolverError("inconsistent specification: the algebraic constraints cannot be met with the given differential components");
    x += s.k * d;
    if (sys.is_linear()) {
      const Vec r2 = s.z.transpose() * sys.residual(zero, x, cfg.t0);
      if (r2.norm() > 1e-8 * std::max(rn, 1e-300))
        throw SolverError("inconsistent specification: the algebraic constraints cannot be met with the given differential components");
      return x;
    }
  }
  throw SolverError("consistent initialization did not converge");
}

// ---------------------------------------------------------------------------

OutputPlan OutputPlan::make(const CoupledDaeSystem& sys, const OutputSelection& sel) {
  OutputPlan p;
  const VariableLayout& lay = sys.layout();
  auto add_state = [&](const std::string& name) {
    const Index k = lay.index_of(name);
    if (k < 0) throw std::invalid_argument("unknown output '" + name + "'");
    p.names.push_back(name);
    p.state_index.push_back(k);
    p.port_voltage.emplace_back(0, 0);
  };
  if (sel.all_nodes) {
    for (Index k = 0; k < lay.n_e; ++k) add_state(lay.names[static_cast<std::size_t>(k)]);
  } else {
    for (const auto& nd : sel.nodes) {
      if (lay.index_of("e_" + nd) < 0) throw std::invalid_argument("unknown node '" + nd + "'");
      add_state("e_" + nd);
    }
  }
  for (Index k = lay.l_offset(); k < lay.v_offset() + lay.n_V; ++k) add_state(lay.names[static_cast<std::size_t>(k)]);
  for (const auto& col : sys.blocks().columns_I) {
    // Current sources are inputs; their values are written for completeness.
    p.names.push_back("i_" + col.branch);
    p.state_index.push_back(-2);
    p.port_voltage.emplace_back(0, 0);
  }
  for (std::size_t s = 0; s < lay.slots.size(); ++s) {
    const ElementSlot& slot = lay.slots[s];
    const Index np = slot.element->n_ports();
    for (Index k = 0; k < np; ++k) add_state(lay.names[static_cast<std::size_t>(slot.i_offset + k)]);
    for (Index k = 0; k < np; ++k) {
      p.names.push_back("v_" + sys.blocks().columns_lambda[static_cast<std::size_t>(slot.lambda_column + k)].name);
      p.state_index.push_back(-1);
      p.port_voltage.emplace_back(s, k);
    }
  }
  return p;
}

std::vector<double> OutputPlan::sample(const CoupledDaeSystem& sys, const Vec& x) const {
  std::vector<double> out(names.size());
  std::vector<Vec> pv(sys.layout().slots.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    const Index k = state_index[c];
    if (k >= 0) {
      out[c] = x(k);
    } else if (k == -1) {
      const auto [s, port] = port_voltage[c];
      if (pv[s].size() == 0) pv[s] = sys.port_voltages(sys.layout().slots[s], x);
      out[c] = pv[s](port);
    }
  }
  return out;
}

TimeSeries implicit_euler(const CoupledDaeSystem& sys, const SolverConfig& cfg, const OutputSelection& sel) {
  cfg.validate();
  const OutputPlan plan = OutputPlan::make(sys, sel);
  // Current-source columns are filled from the waveforms.
  std::vector<std::size_t> src_cols;
  for (std::size_t c = 0; c < plan.names.size(); ++c)
    if (plan.state_index[c] == -2) src_cols.push_back(c);

  const double span = cfg.t_end - cfg.t0;
  const auto steps = static_cast<long long>(std::ceil(span / cfg.dt * (1.0 - 1e-12)));

  TimeSeries ts;
  ts.names = plan.names;
  ts.columns.assign(plan.names.size(), {});
  ts.times.reserve(static_cast<std::size_t>(steps + 1));
  for (auto& c : ts.columns) c.reserve(static_cast<std::size_t>(steps + 1));

  auto record = [&](double t, const Vec& x) {
    ts.times.push_back(t);
    std::vector<double> row = plan.sample(sys, x);
    if (!src_cols.empty()) {
      const Vec is = sys.current_sources(t);
      for (std::size_t k = 0; k < src_cols.size(); ++k) row[src_cols[k]] = is(static_cast<Index>(k));
    }
    for (std::size_t c = 0; c < row.size(); ++c) ts.columns[c].push_back(row[c]);
  };

  Vec x = consistent_init(sys, cfg);
  record(cfg.t0, x);
  ImplicitEuler ie(sys, cfg.newton_tol, cfg.newton_max_iter);
  double t = cfg.t0;
  for (long long k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? cfg.t_end : cfg.t0 + static_cast<double>(k) * cfg.dt;
    x = ie.step(x, t_next, t_next - t);
    t = t_next;
    record(t, x);
  }
  return ts;
}

}  // namespace fcsim
