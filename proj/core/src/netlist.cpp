#include "fcsim/netlist.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace fcsim::netlist {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

bool kind_from_letter(char c, BranchKind& kind) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'R': kind = BranchKind::R; return true;
    case 'C': kind = BranchKind::C; return true;
    case 'L': kind = BranchKind::L; return true;
    case 'V': kind = BranchKind::V; return true;
    case 'I': kind = BranchKind::I; return true;
    case 'X': kind = BranchKind::X; return true;
    default: return false;
  }
}

double parse_number(const Token& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(line, tok.column, "expected a number, got '" + std::string(tok.text) + "'");
  return v;
}

std::string upper(std::string_view s) {
  std::string r(s);
  for (auto& c : r) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

Waveform parse_waveform(const std::vector<Token>& toks, std::size_t first, std::size_t line) {
  if (first >= toks.size()) {
    const std::size_t col = toks.empty() ? 1 : toks.back().column + toks.back().text.size();
    throw ParseError(line, col, "missing source waveform (DC or SIN)");
  }
  Waveform w;
  const std::string form = upper(toks[first].text);
  if (form == "DC") {
    if (toks.size() != first + 2) throw ParseError(line, toks[first].column, "DC expects exactly one value");
    w.form = Waveform::Form::DC;
    w.amplitude = parse_number(toks[first + 1], line);
    return w;
  }
  if (form != "SIN") throw ParseError(line, toks[first].column, "unknown waveform '" + std::string(toks[first].text) + "'");
  w.form = Waveform::Form::SIN;
  std::size_t k = first + 1;
  if (toks.size() < k + 2) throw ParseError(line, toks[first].column, "SIN expects <amp> <freq>");
  w.amplitude = parse_number(toks[k++], line);
  w.frequency = parse_number(toks[k++], line);
  if (k < toks.size() && upper(toks[k].text) != "PERT") w.phase = parse_number(toks[k++], line);
  if (k < toks.size()) {
    if (upper(toks[k].text) != "PERT") throw ParseError(line, toks[k].column, "expected PERT");
    if (toks.size() != k + 3) throw ParseError(line, toks[k].column, "PERT expects <eps> <fp>");
    w.pert_eps = parse_number(toks[k + 1], line);
    w.pert_freq = parse_number(toks[k + 2], line);
  }
  return w;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

char kind_letter(BranchKind kind) {
  switch (kind) {
    case BranchKind::R: return 'R';
    case BranchKind::C: return 'C';
    case BranchKind::L: return 'L';
    case BranchKind::V: return 'V';
    case BranchKind::I: return 'I';
    case BranchKind::X: return 'X';
  }
  return '?';
}

double evaluate_waveform(const Waveform& w, double t) {
  if (w.form == Waveform::Form::DC) return w.amplitude;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return w.amplitude * std::sin(two_pi * w.frequency * t + w.phase) + w.pert_eps * std::sin(two_pi * w.pert_freq * t);
}

const Branch* NetlistDocument::find(std::string_view name) const {
  for (const auto& b : branches)
    if (b.name == name) return &b;
  return nullptr;
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

NetlistDocument parse_netlist(std::string_view text) {
  NetlistDocument doc;
  std::set<std::string> names;
  std::set<std::string> seen_nodes;
  bool have_ground = false;
  std::size_t line_no = 0;

  auto note_node = [&](const std::string& n) {
    if (seen_nodes.insert(n).second) doc.nodes.push_back(n);
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto toks = tokenize(line);
    if (toks.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (toks[0].text.front() == '.') {
      if (upper(toks[0].text) != ".GROUND")
        throw ParseError(line_no, toks[0].column, "unknown directive '" + std::string(toks[0].text) + "'");
      if (toks.size() != 2) throw ParseError(line_no, toks[0].column, ".ground expects exactly one node");
      if (have_ground) throw ParseError(line_no, toks[0].column, "duplicate .ground directive");
      have_ground = true;
      doc.ground = std::string(toks[1].text);
      if (eol == text.size()) break;
      continue;
    }

    Branch b;
    std::size_t k = 0;
    if (toks[0].text.size() == 1) {
      if (!kind_from_letter(toks[0].text[0], b.kind))
        throw ParseError(line_no, toks[0].column, "unknown device kind '" + std::string(toks[0].text) + "'");
      if (toks.size() < 2) throw ParseError(line_no, toks[0].column, "missing branch name");
      b.name = std::string(toks[1].text);
      k = 2;
    } else {
      if (!kind_from_letter(toks[0].text[0], b.kind))
        throw ParseError(line_no, toks[0].column, "unknown device kind '" + std::string(1, toks[0].text[0]) + "'");
      b.name = std::string(toks[0].text);
      k = 1;
    }
    const std::size_t name_col = toks[k - 1].column;
    if (!names.insert(b.name).second) throw ParseError(line_no, name_col, "duplicate branch name '" + b.name + "'");

    if (b.kind == BranchKind::X) {
      std::string spec;
      std::size_t spec_col = 0;
      for (; k < toks.size(); ++k) {
        if (toks[k].text.starts_with("field=")) {
          spec = std::string(toks[k].text.substr(6));
          spec_col = toks[k].column;
          if (k + 1 != toks.size()) throw ParseError(line_no, toks[k + 1].column, "unexpected token after field=");
          break;
        }
        b.terminals.emplace_back(toks[k].text);
      }
      if (spec_col == 0) throw ParseError(line_no, name_col, "X branch requires field=<path>");
      if (spec.empty()) throw ParseError(line_no, spec_col, "empty field spec path");
      if (b.terminals.size() < 2 || b.terminals.size() % 2 != 0)
        throw ParseError(line_no, name_col, "X branch needs an even number (>= 2) of nodes");
      b.field_spec = spec;
      doc.field_specs[b.name] = spec;
    } else {
      if (toks.size() < k + 2) throw ParseError(line_no, name_col, "branch needs two nodes");
      b.terminals = {std::string(toks[k].text), std::string(toks[k + 1].text)};
      k += 2;
      if (b.kind == BranchKind::V || b.kind == BranchKind::I) {
        b.waveform = parse_waveform(toks, k, line_no);
      } else {
        if (toks.size() != k + 1) {
          const std::size_t col = k < toks.size() ? toks[k].column : name_col;
          throw ParseError(line_no, col, "expected exactly one value");
        }
        b.value = parse_number(toks[k], line_no);
        if (!(b.value > 0.0)) {
          const char* what = b.kind == BranchKind::R ? "resistance" : b.kind == BranchKind::C ? "capacitance" : "inductance";
          throw ParseError(line_no, toks[k].column, std::string("non-positive ") + what);
        }
      }
    }
    for (std::size_t p = 0; p < b.terminals.size(); p += 2) {
      if (b.terminals[p] == b.terminals[p + 1])
        throw ParseError(line_no, name_col, "branch '" + b.name + "' connects a node to itself");
    }
    for (const auto& n : b.terminals) note_node(n);
    doc.branches.push_back(std::move(b));
    if (eol == text.size()) break;
  }

  if (!have_ground) throw ParseError(line_no, 1, "missing .ground directive");
  note_node(doc.ground);
  return doc;
}

NetlistDocument load_netlist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open netlist '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

std::string serialize(const NetlistDocument& doc) {
  std::ostringstream os;
  for (const auto& b : doc.branches) {
    os << kind_letter(b.kind) << ' ' << b.name;
    for (const auto& t : b.terminals) os << ' ' << t;
    switch (b.kind) {
      case BranchKind::R:
      case BranchKind::C:
      case BranchKind::L: os << ' ' << format_number(b.value); break;
      case BranchKind::V:
      case BranchKind::I: {
        const auto& w = b.waveform;
        if (w.form == Waveform::Form::DC) {
          os << " DC " << format_number(w.amplitude);
        } else {
          os << " SIN " << format_number(w.amplitude) << ' ' << format_number(w.frequency) << ' ' << format_number(w.phase);
          if (w.pert_eps != 0.0 || w.pert_freq != 0.0)
            os << " PERT " << format_number(w.pert_eps) << ' ' << format_number(w.pert_freq);
        }
        break;
      }
      case BranchKind::X: os << " field=" << b.field_spec; break;
    }
    os << '\n';
  }
  os << ".ground " << doc.ground << '\n';
  return os.str();
}

}  // namespace fcsim::netlist
