#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cofl/model.hpp"

namespace cofl {

// An internally consistent set of feature selections (one value per option),
// kept sorted by option name.
struct SelectionSet {
  std::vector<FeatureSelection> selections;

  SelectionSet() = default;
  explicit SelectionSet(std::vector<FeatureSelection> sels);

  bool contains(const FeatureSelection& s) const;
  bool subset_of(const SelectionSet& other) const;
  bool subset_of_config(const Configuration& c) const;
  std::size_t size() const { return selections.size(); }
  bool empty() const { return selections.empty(); }
  std::string str() const;

  auto operator<=>(const SelectionSet&) const = default;
};

struct SuspiciousPartialConfiguration {
  SelectionSet selections;
  std::vector<std::string> witness_failing;  // all CF configurations containing it

  auto operator<=>(const SuspiciousPartialConfiguration&) const = default;
};

struct ConditionCheck {
  bool holds = true;
  std::optional<std::string> counterexample;  // violating configuration id
};

// Necessity: every available configuration containing S fails at least one
// test. On violation, the counterexample is a containing passing config.
ConditionCheck check_necessity(const SelectionSet& s, const ConfigurationSuite& suite);

// Sufficiency: no passing configuration contains S (non-strict containment).
ConditionCheck check_sufficiency(const SelectionSet& s, const ConfigurationSuite& suite);

// Per failing configuration c: the minimal selection sets whose reversal
// inside c yields a passing configuration, and their union.
struct SwitchFamily {
  std::string config;
  std::vector<SelectionSet> minimal_switch_sets;  // the antichain kept in wp(c)
  SelectionSet delta;                              // union of the minimal sets
};

SwitchFamily switch_sets(const Configuration& c, const ConfigurationSuite& suite);

struct SpcOptions {
  std::uint64_t budget = std::uint64_t{1} << 20;  // candidate subsets per failing config
  int jobs = 1;
};

// Suspicious partial configurations: minimal selection sets that satisfy
// necessity and sufficiency and are contained in at least one failing
// configuration. Deterministic order: by size, then lexicographically.
std::vector<SuspiciousPartialConfiguration> detect_spcs(const ConfigurationSuite& suite,
                                                        const SpcOptions& opts = {});

// Definition-literal oracle: enumerates every consistent selection set over
// the option universe. Refuses suites with more options than `option_cap`.
std::vector<SuspiciousPartialConfiguration> brute_force_spcs(const ConfigurationSuite& suite,
                                                             int option_cap = 16);

// Single-bug fast path: intersect the failing configurations' selections and
// keep the selections confirmed by a single-switch passing configuration.
SuspiciousPartialConfiguration single_fault_spc(const ConfigurationSuite& suite);

// Necessity + sufficiency + minimality (over non-empty proper subsets) +
// non-empty failing witness. Throws std::logic_error on violation; used as an
// always-on self-check and by the acceptance audit.
void audit_spc(const SuspiciousPartialConfiguration& spc, const ConfigurationSuite& suite);

}  // namespace cofl
