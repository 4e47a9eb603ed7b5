#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cofl {

using StatementId = int;

// Errors caused by bad user input (files, flags, inconsistent data).
// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Subset enumeration would exceed the configured budget. Exit code 3.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// (option, polarity). A negated guard such as `#ifndef SLOB` yields the
// literal (SLOB, false), which participates in phi/def/use like any feature.
struct FeatureLiteral {
  std::string option;
  bool value = true;

  auto operator<=>(const FeatureLiteral&) const = default;
};

std::string to_string(const FeatureLiteral& lit);

// (option, chosen value) inside a configuration or partial configuration.
struct FeatureSelection {
  std::string option;
  bool value = true;

  auto operator<=>(const FeatureSelection&) const = default;
};

std::string to_string(const FeatureSelection& sel);

enum class EntityKind { Variable, Function };

// A named program element. Identity is (scope, name); kind is metadata.
struct Entity {
  std::string scope;  // enclosing function name, or "GLOBAL"
  std::string name;
  EntityKind kind = EntityKind::Variable;

  bool operator==(const Entity& o) const { return scope == o.scope && name == o.name; }
  bool operator<(const Entity& o) const {
    if (scope != o.scope) return scope < o.scope;
    return name < o.name;
  }
  std::string str() const { return scope + "." + name; }
};

inline const char* kGlobalScope = "GLOBAL";

enum class DefKind { Value, Body, Uninit, Undefined };

const char* to_string(DefKind k);

struct Statement {
  StatementId id = -1;
  std::string file;
  int line_begin = 0;
  int line_end = 0;
  std::vector<FeatureLiteral> pc;  // conjunction; at most one literal per option
  std::vector<std::pair<Entity, DefKind>> defs;
  std::vector<Entity> uses;
  std::optional<StatementId> control_parent;
  std::string text;  // one-line rendering for reports
};

// Immutable after finalize(); safe for concurrent reads.
class ProgramModel {
 public:
  std::vector<Statement> statements;  // statements[i].id == i

  // Derived by finalize():
  std::set<Entity> entities;
  std::set<FeatureLiteral> features;  // includes declared features with empty phi
  std::set<std::string> options;
  std::map<FeatureLiteral, std::set<StatementId>> phi;
  std::map<Entity, std::set<StatementId>> define_map;
  std::map<Entity, std::set<StatementId>> use_map;

  // Features mentioned by guards even when their block is empty; merged into
  // `features` by finalize().
  std::set<FeatureLiteral> declared_features;

  void finalize();

  const std::set<StatementId>& phi_of(const FeatureLiteral& f) const;
  const std::set<StatementId>& defines_of(const Entity& e) const;
  const std::set<StatementId>& uses_of(const Entity& e) const;

 private:
  std::set<StatementId> empty_;
};

struct Configuration {
  std::string id;
  std::map<std::string, bool> selections;  // total over the model's options

  bool contains(const FeatureSelection& s) const {
    auto it = selections.find(s.option);
    return it != selections.end() && it->second == s.value;
  }
  bool satisfies(const FeatureLiteral& lit) const {
    auto it = selections.find(lit.option);
    return it != selections.end() && it->second == lit.value;
  }
};

struct Verdict {
  std::string config;
  std::string test;
  bool pass = true;
};

struct ConfigurationSuite {
  std::vector<Configuration> configurations;
  std::vector<Verdict> verdicts;

  // Throws InputError on: configuration without verdicts, verdict for an
  // unknown configuration, duplicate (config, test) verdicts, or two
  // configurations with equal selection maps (they would be the same
  // configuration under the model's equality).
  void validate() const;

  const Configuration* find(const std::string& id) const;
  std::vector<std::string> tests_of(const std::string& config_id) const;
  std::optional<bool> verdict_of(const std::string& config_id, const std::string& test_id) const;
};

struct SuitePartition {
  std::set<std::string> passing;  // CP: every test passed
  std::set<std::string> failing;  // CF: at least one failed test
};

// Statements whose presence condition is satisfied by `c`; core statements
// (empty pc) are always included. Throws InputError when `c` mentions an
// option unknown to the model or misses one of the model's options.
std::set<StatementId> statements_enabled(const ProgramModel& model, const Configuration& c);

SuitePartition partition_suite(const ConfigurationSuite& suite);

}  // namespace cofl
