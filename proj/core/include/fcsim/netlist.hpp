#pragma once

// Textual netlist format.
//
//   R <name> <n+> <n-> <value>
//   C <name> <n+> <n-> <value>
//   L <name> <n+> <n-> <value>
//   V <name> <n+> <n-> DC <v> | SIN <amp> <freq> [<phase>] [PERT <eps> <fp>]
//   I <name> <n+> <n-> DC <i> | SIN <amp> <freq> [<phase>] [PERT <eps> <fp>]
//   X <name> <n+> <n-> [<n+> <n-> ...] field=<path>
//   .ground <node>
//
// '#' starts a comment. The SPICE-style short form with the kind taken from
// the first letter of the name ("R1 1 0 1.0") is accepted as well.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcsim::netlist {

enum class BranchKind { R, C, L, V, I, X };

char kind_letter(BranchKind kind);

struct Waveform {
  enum class Form { DC, SIN };
  Form form = Form::DC;
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
  double pert_eps = 0.0;
  double pert_freq = 0.0;  // Hz

  bool operator==(const Waveform&) const = default;
};

/// DC -> amplitude; SIN -> amp*sin(2 pi f t + phase) + eps*sin(2 pi f_p t).
double evaluate_waveform(const Waveform& w, double t);

struct Branch {
  std::string name;
  BranchKind kind = BranchKind::R;
  std::vector<std::string> terminals;  // (n+, n-) pairs; 2k entries for a k-port X
  double value = 0.0;                  // ohm / farad / henry for R, C, L
  Waveform waveform;                   // V and I only
  std::string field_spec;              // X only

  const std::string& node_plus() const { return terminals.at(0); }
  const std::string& node_minus() const { return terminals.at(1); }
  std::size_t port_count() const { return terminals.size() / 2; }

  bool operator==(const Branch&) const = default;
};

struct NetlistDocument {
  std::vector<std::string> nodes;  // first-appearance order, ground included
  std::string ground;
  std::vector<Branch> branches;
  std::map<std::string, std::string> field_specs;  // X name -> spec path

  const Branch* find(std::string_view name) const;
  bool operator==(const NetlistDocument&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

NetlistDocument parse_netlist(std::string_view text);
NetlistDocument load_netlist(const std::filesystem::path& path);

/// Canonical long-form text; parse_netlist(serialize(d)) == d.
std::string serialize(const NetlistDocument& doc);

}  // namespace fcsim::netlist
