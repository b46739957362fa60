#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/curvature.hpp"

namespace finsler {

struct ParamInfo {
  std::string name;
  ParamValue fallback;
  std::string description;
  std::vector<std::string> choices;  // empty for numeric parameters
  std::optional<double> min;         // exclusive bounds
  std::optional<double> max;
};

struct EntryDescriptor {
  std::string id;
  std::string summary;
  std::string anchor;
  std::vector<ParamInfo> params;
  std::string domain;
};

struct CatalogEntry {
  std::string id;
  std::string anchor;
  MetricProfile profile;
  // Expected verdicts; verdicts not listed are not asserted.
  std::vector<std::pair<std::string, Status>> expected;
  std::optional<double> expected_K;
};

CatalogEntry get_entry(const std::string& id, const Params& params = {});
std::vector<EntryDescriptor> list_entries();

// Quadrature twin of a closed-form entry: the family build with the same
// generators, gauge matched to the entry on s = s0(r).  InvalidConfig for
// entries without one.
CatalogEntry get_entry_quadrature(const std::string& id, const Params& params = {});
bool has_quadrature_twin(const std::string& id);
const EntryDescriptor& describe_entry(const std::string& id);

// Fills defaults and validates names and ranges.
Params resolve_params(const EntryDescriptor& d, const Params& given);

struct ExpectationCheck {
  bool all_matched = true;
  std::vector<std::string> mismatches;
};

ExpectationCheck check_expectations(const CatalogEntry& entry, const ClassificationReport& report,
                                    double K_tol = 1e-6);

// Closed-form profile of the g-family with eta(x) = sqrt(x)(gamma x^m + eps);
// exposed for tests.
Jet2 corn_phi(int m, const std::string& g_name, double gamma, double eps, const RsPoint& at);

}  // namespace finsler
