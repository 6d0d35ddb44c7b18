#pragma once

// Perturbation experiment: a coupled circuit with one field element and one
// source is integrated with and without a small high-frequency perturbation
// on the source, for a list of step sizes.

#include "fcsim/solver.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fcsim {

struct ExperimentConfig {
  double epsilon = 1e-4;
  /// Perturbation frequency as a multiple of the source frequency.
  double fp_factor = 1e9;
  std::vector<double> dts{8e-5, 4e-5, 2e-5, 1e-5};
  double t0 = 0.0;
  double t_end = 0.5;
  double warmup_span = 8e-5;
  /// Bound on D for index-1 circuits, in units of epsilon.
  double index1_bound = 10.0;
  /// Accepted window for D(dt/2)/D(dt) on index-2 circuits.
  double ratio_lo = 1.5, ratio_hi = 2.5;
  bool parallel = true;

  void validate() const;
};

struct ExperimentRun {
  double dt = 0.0;
  TimeSeries base, perturbed;
  double deviation = 0.0;  // max over t of |perturbed - base| on the output column
  /// |sin(pi f_p dt)|: the perturbation seen by one implicit Euler step is
  /// p(t_n) - p(t_{n-1}), whose amplitude is 2 epsilon times this factor.
  double sampling_factor = 0.0;
};

struct ExperimentResult {
  int classified_index = 0;
  std::string source;         // the driving source
  std::string output_column;  // port current for V drive, port voltage for I drive
  double epsilon = 0.0;
  std::vector<ExperimentRun> runs;
  std::vector<double> ratios;             // D(dt_{k+1}) / D(dt_k)
  std::vector<double> normalized_ratios;  // same with D divided by the sampling factor
  bool index1_bounded = false;
  bool index2_growth = false;             // raw ratios inside the window
  bool index2_growth_normalized = false;  // normalized ratios inside the window
  std::string verdict;
  bool consistent = false;  // observation agrees with the topological index

  void write_summary(std::ostream& os) const;
};

/// Runs the experiment. `doc` must contain exactly one X branch and exactly
/// one independent source with a SIN waveform; `elements` binds the X branch.
ExperimentResult run_perturbation_experiment(const netlist::NetlistDocument& doc, const std::map<std::string, ElementPtr>& elements,
                                             const ExperimentConfig& cfg);

}  // namespace fcsim
