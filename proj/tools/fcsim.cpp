// fcsim: index analysis, transient simulation, field verification and the
// perturbation experiment.

#include "fcsim/experiment.hpp"
#include "fcsim/field_suite.hpp"
#include "fcsim/netlist.hpp"
#include "fcsim/solver.hpp"
#include "fcsim/topology.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fcsim;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input_error = 1;
constexpr int exit_not_well_posed = 2;
constexpr int exit_inconsistent = 3;
constexpr int exit_runtime_error = 4;

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("malformed number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_analyze(const std::string& path, bool key_value) {
  netlist::NetlistDocument doc;
  topology::IncidenceBlocks blocks;
  try {
    doc = netlist::load_netlist(path);
    blocks = topology::incidence_blocks(doc);
  } catch (const netlist::ParseError& e) {
    std::cerr << path << ":" << e.line() << ":" << e.column() << ": " << e.what() << '\n';
    return exit_input_error;
  } catch (const topology::TopologyError& e) {
    std::cout << "circuit is not well posed\n  " << e.what() << '\n';
    return exit_not_well_posed;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_input_error;
  }
  const topology::WellPosedReport wp = topology::check_well_posed(blocks);
  if (!wp.well_posed) {
    std::cout << (key_value ? "well_posed=false\n" : "circuit is not well posed\n");
    for (const auto& v : wp.violations) std::cout << (key_value ? "violation=" : "  ") << v << '\n';
    return exit_not_well_posed;
  }
  const topology::IndexReport rep = topology::classify_index(blocks);
  std::cout << (key_value ? rep.to_key_value() : rep.to_text());
  return exit_ok;
}

CoupledDaeSystem load_system(const std::string& path) {
  const netlist::NetlistDocument doc = netlist::load_netlist(path);
  const auto elements = field::bind_field_elements(doc, fs::path(path).parent_path());
  return assemble(doc, elements);
}

struct SimulateOptions {
  std::string netlist, out, init = "auto", nodes;
  double dt = 0, t_end = 0, t0 = 0, newton_tol = 1e-10;
};

int cmd_simulate(const SimulateOptions& o) {
  const CoupledDaeSystem sys = load_system(o.netlist);
  SolverConfig cfg;
  cfg.dt = o.dt;
  cfg.t0 = o.t0;
  cfg.t_end = o.t_end;
  cfg.newton_tol = o.newton_tol;
  if (o.init == "consistent") {
    cfg.init_mode = InitMode::ConsistentAlgebraic;
  } else if (o.init == "warmup") {
    cfg.init_mode = InitMode::TwoStepWarmup;
  } else {
    const int index = topology::classify_index(sys.blocks()).index;
    cfg.init_mode = index >= 2 ? InitMode::TwoStepWarmup : InitMode::ConsistentAlgebraic;
  }
  OutputSelection sel;
  if (!o.nodes.empty()) {
    sel.all_nodes = false;
    sel.nodes = split_names(o.nodes);
  }
  const TimeSeries ts = implicit_euler(sys, cfg, sel);
  ts.write_csv(o.out);
  std::cerr << "wrote " << ts.rows() << " rows to " << o.out << '\n';
  return exit_ok;
}

struct ExperimentOptions {
  std::string netlist, out_dir, dt_list = "8e-5,4e-5,2e-5,1e-5";
  double epsilon = 1e-4, fp_factor = 1e9, t0 = 0.0, t_end = 0.5;
  bool serial = false;
};

int cmd_experiment(const ExperimentOptions& o) {
  const netlist::NetlistDocument doc = netlist::load_netlist(o.netlist);
  const auto elements = field::bind_field_elements(doc, fs::path(o.netlist).parent_path());
  ExperimentConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.fp_factor = o.fp_factor;
  cfg.dts = parse_double_list(o.dt_list);
  cfg.t0 = o.t0;
  cfg.t_end = o.t_end;
  cfg.parallel = !o.serial;
  cfg.validate();
  const ExperimentResult res = run_perturbation_experiment(doc, elements, cfg);

  fs::create_directories(o.out_dir);
  for (const auto& r : res.runs) {
    const std::string stem = "dt_" + shortest(r.dt);
    r.base.write_csv((fs::path(o.out_dir) / (stem + "_base.csv")).string());
    r.perturbed.write_csv((fs::path(o.out_dir) / (stem + "_perturbed.csv")).string());
  }
  {
    std::ofstream f(fs::path(o.out_dir) / "summary.csv", std::ios::binary);
    res.write_summary(f);
  }
  std::cout << "source " << res.source << ", output " << res.output_column << ", topological index " << res.classified_index << '\n';
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    std::cout << "  dt = " << shortest(res.runs[k].dt) << "  D = " << shortest(res.runs[k].deviation)
              << "  D/epsilon = " << shortest(res.runs[k].deviation / res.epsilon);
    if (k > 0)
      std::cout << "  ratio = " << shortest(res.ratios[k - 1]) << "  normalized ratio = " << shortest(res.normalized_ratios[k - 1]);
    std::cout << '\n';
  }
  std::cout << "verdict: " << res.verdict << '\n';
  if (!res.consistent) {
    std::cout << "observation disagrees with the topological index " << res.classified_index << '\n';
    return exit_inconsistent;
  }
  return exit_ok;
}

int cmd_field_verify(const std::string& path) {
  const field::FieldSpec spec = field::load_field_spec(path);
  const field::FieldVerifyReport rep = field::verify_field(spec);
  std::cout << rep.to_text();
  return rep.ok() ? exit_ok : exit_not_well_posed;
}

int cmd_field_inductance(const std::string& path) {
  const field::FieldSpec spec = field::load_field_spec(path);
  const field::InductanceSummary s = field::field_inductance(spec);
  std::cout << "formulation: " << field::formulation_name(spec.formulation) << '\n';
  std::cout << "L_lambda [H]:\n";
  const Mat& l = s.closed_form.L;
  for (Index r = 0; r < l.rows(); ++r) {
    for (Index c = 0; c < l.cols(); ++c) std::cout << (c ? "  " : "  ") << std::setprecision(17) << l(r, c);
    std::cout << '\n';
  }
  std::cout << "smallest eigenvalue [H]: " << std::setprecision(17) << s.closed_form.min_eigenvalue << '\n';
  std::cout << "relative gap to the extracted inductance: " << std::setprecision(6) << s.relative_gap << '\n';
  return s.closed_form.spd() ? exit_ok : exit_not_well_posed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fcsim: field/circuit coupled DAE simulator"};
  app.require_subcommand(1);

  std::string analyze_path;
  bool key_value = false;
  auto* analyze = app.add_subcommand("analyze", "Classify the differential index of a netlist");
  analyze->add_option("netlist", analyze_path, "Netlist file")->required();
  analyze->add_flag("--key-value", key_value, "Machine-readable key=value output");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Implicit Euler transient simulation to CSV");
  simulate->add_option("netlist", sim.netlist, "Netlist file")->required();
  simulate->add_option("--dt", sim.dt, "Step size [s]")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--t-end", sim.t_end, "Final time [s]")->required();
  simulate->add_option("--out", sim.out, "Output CSV")->required();
  simulate->add_option("--t0", sim.t0, "Initial time [s]");
  simulate->add_option("--init", sim.init, "Initialization: auto, consistent or warmup")
      ->check(CLI::IsMember({"auto", "consistent", "warmup"}));
  simulate->add_option("--nodes", sim.nodes, "Comma-separated node potentials to write (default: all)");
  simulate->add_option("--newton-tol", sim.newton_tol, "Relative Newton residual tolerance")->check(CLI::PositiveNumber);

  ExperimentOptions ex;
  auto* experiment = app.add_subcommand("experiment", "Numerical experiments");
  experiment->require_subcommand(1);
  auto* perturbation = experiment->add_subcommand("perturbation", "Base vs perturbed source over a step-size sweep");
  perturbation->add_option("netlist", ex.netlist, "Netlist file")->required();
  perturbation->add_option("--epsilon", ex.epsilon, "Perturbation amplitude")->check(CLI::PositiveNumber);
  perturbation->add_option("--dt-list", ex.dt_list, "Comma-separated, strictly decreasing step sizes [s]");
  perturbation->add_option("--out-dir", ex.out_dir, "Directory for the CSV files")->required();
  perturbation->add_option("--fp-factor", ex.fp_factor, "Perturbation frequency as a multiple of the source frequency");
  perturbation->add_option("--t0", ex.t0, "Initial time [s]");
  perturbation->add_option("--t-end", ex.t_end, "Final time [s]");
  perturbation->add_flag("--serial", ex.serial, "Run the step sizes one after another");

  std::string field_path;
  auto* fieldcmd = app.add_subcommand("field", "Field model utilities");
  fieldcmd->require_subcommand(1);
  auto* verify = fieldcmd->add_subcommand("verify", "Run the discrete-operator, gauge and formulation checks");
  verify->add_option("spec", field_path, "Field spec file")->required();
  auto* inductance = fieldcmd->add_subcommand("inductance", "Print the lumped inductance matrix L_lambda");
  inductance->add_option("spec", field_path, "Field spec file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_input_error;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_path, key_value);
    if (*simulate) return cmd_simulate(sim);
    if (*perturbation) return cmd_experiment(ex);
    if (*verify) return cmd_field_verify(field_path);
    if (*inductance) return cmd_field_inductance(field_path);
  } catch (const netlist::ParseError& e) {
    std::cerr << "parse error at " << e.line() << ":" << e.column() << ": " << e.what() << '\n';
    return exit_input_error;
  } catch (const field::FieldSpecError& e) {
    std::cerr << "field spec error: " << e.what() << '\n';
    return exit_input_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime_error;
  }
  return exit_ok;
}
