#pragma once

// Implicit Euler time integration of the coupled DAE with Newton iterations.

#include "fcsim/mna.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fcsim {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitMode { ConsistentAlgebraic, TwoStepWarmup };

struct SolverConfig {
  double dt = 1e-3;
  double t0 = 0.0;
  double t_end = 1.0;
  double newton_tol = 1e-10;  // relative residual
  int newton_max_iter = 25;
  InitMode init_mode = InitMode::ConsistentAlgebraic;
  /// Span of the two-step warm-up: it starts from x = 0 at t0 - warmup_span.
  double warmup_span = 8e-5;
  /// Differential components for ConsistentAlgebraic; zero when empty.
  Vec initial_guess;

  void validate() const;
};

/// Which node potentials are written. Port currents and voltages of X
/// elements, inductor currents and source currents are always written.
struct OutputSelection {
  bool all_nodes = true;
  std::vector<std::string> nodes;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  Index rows() const { return static_cast<Index>(times.size()); }
  const std::vector<double>& column(const std::string& name) const;
  /// RFC-4180 CSV with a header row; first column `time`; shortest
  /// round-trip decimal representation of every double.
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
};

/// Newton history of one implicit Euler step (residual norms per iterate,
/// starting with the initial guess).
struct NewtonHistory {
  std::vector<double> residual_norms;
  int iterations = 0;
};

/// Implicit Euler stepper. For linear systems the iteration matrix is
/// factored once per step size and every step is a single solve.
class ImplicitEuler {
 public:
  ImplicitEuler(const CoupledDaeSystem& sys, double newton_tol = 1e-10, int newton_max_iter = 25);

  /// Solves F((x - x_prev)/dt, x, t_next) = 0.
  Vec step(const Vec& x_prev, double t_next, double dt, NewtonHistory* history = nullptr);

 private:
  struct Factorization;
  const CoupledDaeSystem& sys_;
  double tol_;
  int max_iter_;
  std::shared_ptr<Factorization> cached_;
  double cached_dt_ = 0.0;

  std::shared_ptr<Factorization> factor(const SpMat& j) const;
};

/// (E, A) = (dF/dx', dF/dx) at (x' = 0, x, t).
std::pair<SpMat, SpMat> linearize(const CoupledDaeSystem& sys, const Vec& x, double t);

/// Consistent state at cfg.t0 according to cfg.init_mode.
Vec consistent_init(const CoupledDaeSystem& sys, const SolverConfig& cfg);

/// Relative residual of the algebraic equations Z^T F(0, x, t) where Z spans
/// the left kernel of E and A = dF/dx: |Z^T F| / (|Z^T A| |x| + |Z^T f|).
double algebraic_residual(const CoupledDaeSystem& sys, const Vec& x, double t);

/// Names and extractors of the output columns for a system.
struct OutputPlan {
  std::vector<std::string> names;
  std::vector<Index> state_index;  // -1 for derived port voltages
  std::vector<std::pair<std::size_t, Index>> port_voltage;  // (slot, port) when state_index is -1

  static OutputPlan make(const CoupledDaeSystem& sys, const OutputSelection& sel);
  std::vector<double> sample(const CoupledDaeSystem& sys, const Vec& x) const;
};

/// Integrates from cfg.t0 to cfg.t_end with ceil((t_end - t0)/dt) steps, the
/// last one shortened to land on t_end exactly.
TimeSeries implicit_euler(const CoupledDaeSystem& sys, const SolverConfig& cfg, const OutputSelection& sel = {});

}  // namespace fcsim
