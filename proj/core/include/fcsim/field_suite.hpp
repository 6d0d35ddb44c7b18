#pragma once

// Field elements bound to netlist X branches, and the verification suite run
// by `fcsim field verify`.

#include "fcsim/element.hpp"
#include "fcsim/field_model.hpp"
#include "fcsim/netlist.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fcsim::field {

/// T-Omega or A* element according to spec.formulation.
ElementPtr make_field_element(const FitModel& model);

/// Loads the field spec of every X branch (paths relative to base_dir), builds
/// its element and checks that the coil count matches the branch's port count.
std::map<std::string, ElementPtr> bind_field_elements(const netlist::NetlistDocument& doc, const std::filesystem::path& base_dir);

struct VerifyItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct FieldVerifyReport {
  std::vector<VerifyItem> items;
  bool ok() const;
  std::string to_text() const;
};

FieldVerifyReport verify_field(const FieldSpec& spec);

struct InductanceSummary {
  LLambda closed_form;
  Mat extracted;        // from the element's own equations
  double relative_gap;  // ||closed - extracted|| / ||closed||
};

InductanceSummary field_inductance(const FieldSpec& spec);

}  // namespace fcsim::field
