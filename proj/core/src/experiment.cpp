#include "fcsim/experiment.hpp"

#include <charconv>
#include <cmath>
#include <future>
#include <numbers>
#include <ostream>

namespace fcsim {

void ExperimentConfig::validate() const {
  if (dts.empty()) throw std::invalid_argument("the step-size list is empty");
  for (std::size_t k = 0; k < dts.size(); ++k) {
    if (!(dts[k] > 0.0)) throw std::invalid_argument("step sizes must be positive");
    if (k > 0 && !(dts[k] < dts[k - 1])) throw std::invalid_argument("step sizes must be strictly decreasing");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed t0");
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void ExperimentResult::write_summary(std::ostream& os) const {
  os << "dt,D,D_over_epsilon,ratio,sampling_factor,normalized_ratio\r\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    os << shortest(runs[k].dt) << ',' << shortest(runs[k].deviation) << ',' << shortest(runs[k].deviation / epsilon) << ',';
    if (k > 0) os << shortest(ratios[k - 1]);
    os << ',' << shortest(runs[k].sampling_factor) << ',';
    if (k > 0) os << shortest(normalized_ratios[k - 1]);
    os << "\r\n";
  }
}

ExperimentResult run_perturbation_experiment(const netlist::NetlistDocument& doc, const std::map<std::string, ElementPtr>& elements,
                                             const ExperimentConfig& cfg) {
  cfg.validate();
  const netlist::Branch* x_branch = nullptr;
  const netlist::Branch* src = nullptr;
  for (const auto& b : doc.branches) {
    if (b.kind == netlist::BranchKind::X) {
      if (x_branch) throw std::invalid_argument("the experiment needs exactly one X element");
      x_branch = &b;
    } else if (b.kind == netlist::BranchKind::V || b.kind == netlist::BranchKind::I) {
      if (src) throw std::invalid_argument("the experiment needs exactly one independent source");
      src = &b;
    }
  }
  if (!x_branch) throw std::invalid_argument("the experiment needs exactly one X element");
  if (!src) throw std::invalid_argument("the experiment needs exactly one independent source");
  if (src->waveform.form != netlist::Waveform::Form::SIN || !(src->waveform.frequency > 0.0))
    throw std::invalid_argument("the driving source must have a SIN waveform with positive frequency");

  ExperimentResult res;
  res.epsilon = cfg.epsilon;
  res.source = src->name;
  res.classified_index = topology::classify_index(topology::incidence_blocks(doc)).index;
  res.output_column = (src->kind == netlist::BranchKind::V ? "i_" : "v_") + x_branch->name;

  netlist::NetlistDocument base = doc, pert = doc;
  for (auto* d : {&base, &pert})
    for (auto& b : d->branches)
      if (b.name == src->name) {
        b.waveform.pert_eps = d == &pert ? cfg.epsilon : 0.0;
        b.waveform.pert_freq = d == &pert ? src->waveform.frequency * cfg.fp_factor : 0.0;
      }
  const CoupledDaeSystem sys_base = assemble(base, elements);
  const CoupledDaeSystem sys_pert = assemble(pert, elements);

  const double fp = src->waveform.frequency * cfg.fp_factor;
  auto run_one = [&](double dt) {
    SolverConfig sc;
    sc.dt = dt;
    sc.t0 = cfg.t0;
    sc.t_end = cfg.t_end;
    sc.init_mode = InitMode::TwoStepWarmup;
    sc.warmup_span = cfg.warmup_span;
    ExperimentRun r;
    r.dt = dt;
    r.sampling_factor = std::abs(std::sin(std::numbers::pi * std::fmod(fp * dt, 2.0)));
    r.base = implicit_euler(sys_base, sc);
    r.perturbed = implicit_euler(sys_pert, sc);
    const auto& a = r.base.column(res.output_column);
    const auto& b = r.perturbed.column(res.output_column);
    for (std::size_t k = 0; k < a.size(); ++k) r.deviation = std::max(r.deviation, std::abs(b[k] - a[k]));
    return r;
  };

  if (cfg.parallel) {
    std::vector<std::future<ExperimentRun>> fut;
    for (double dt : cfg.dts) fut.push_back(std::async(std::launch::async, run_one, dt));
    for (auto& f : fut) res.runs.push_back(f.get());
  } else {
    for (double dt : cfg.dts) res.runs.push_back(run_one(dt));
  }

  res.index1_bounded = true;
  for (const auto& r : res.runs) res.index1_bounded = res.index1_bounded && r.deviation <= cfg.index1_bound * cfg.epsilon;
  auto in_window = [&](double r) { return std::isfinite(r) && r >= cfg.ratio_lo && r <= cfg.ratio_hi; };
  res.index2_growth = res.index2_growth_normalized = res.runs.size() >= 2;
  for (std::size_t k = 1; k < res.runs.size(); ++k) {
    const ExperimentRun& a = res.runs[k - 1];
    const ExperimentRun& b = res.runs[k];
    const double ratio = b.deviation / a.deviation;
    const double normalized = (b.deviation / b.sampling_factor) / (a.deviation / a.sampling_factor);
    res.ratios.push_back(ratio);
    res.normalized_ratios.push_back(normalized);
    res.index2_growth = res.index2_growth && in_window(ratio);
    res.index2_growth_normalized = res.index2_growth_normalized && in_window(normalized);
  }
  const bool grows = res.index2_growth || res.index2_growth_normalized;
  if (res.index1_bounded && !grows)
    res.verdict = "index-1: bounded, no dt growth";
  else if (!res.index1_bounded && res.index2_growth)
    res.verdict = "index-2: D grows ∝ 1/dt";
  else if (!res.index1_bounded && res.index2_growth_normalized)
    res.verdict = "index-2: D grows ∝ 1/dt once the sampling factor |sin(pi f_p dt)| is divided out";
  else
    res.verdict = "undetermined: neither a bounded deviation nor 1/dt growth";
  res.consistent = (res.classified_index == 1 && res.index1_bounded && !grows) || (res.classified_index == 2 && !res.index1_bounded && grows);
  return res;
}

}  // namespace fcsim
