#include "cofl/model.hpp"

#include <algorithm>
#include <map>

namespace cofl {

std::string to_string(const FeatureLiteral& lit) {
  return (lit.value ? "" : "!") + lit.option;
}

std::string to_string(const FeatureSelection& sel) {
  return sel.option + (sel.value ? "=T" : "=F");
}

const char* to_string(DefKind k) {
  switch (k) {
    case DefKind::Value: return "value";
    case DefKind::Body: return "body";
    case DefKind::Uninit: return "UNINIT";
    case DefKind::Undefined: return "UNDEFINED";
  }
  return "?";
}

void ProgramModel::finalize() {
  entities.clear();
  features.clear();
  options.clear();
  phi.clear();
  define_map.clear();
  use_map.clear();

  for (std::size_t i = 0; i < statements.size(); ++i) {
    Statement& s = statements[i];
    if (s.id != static_cast<StatementId>(i))
      throw InputError("statement ids must be contiguous and in order (got id " +
                       std::to_string(s.id) + " at index " + std::to_string(i) + ")");

    std::set<std::string> seen_options;
    for (const FeatureLiteral& lit : s.pc) {
      if (!seen_options.insert(lit.option).second)
        throw InputError("statement " + std::to_string(s.id) +
                         " has two presence literals for option " + lit.option);
      features.insert(lit);
      options.insert(lit.option);
      phi[lit].insert(s.id);
    }
    if (s.control_parent) {
      if (*s.control_parent < 0 || *s.control_parent >= static_cast<StatementId>(statements.size()))
        throw InputError("statement " + std::to_string(s.id) + " has an unknown control parent");
    }
    for (const auto& [e, kind] : s.defs) {
      (void)kind;
      entities.insert(e);
      define_map[e].insert(s.id);
    }
    for (const Entity& e : s.uses) {
      entities.insert(e);
      use_map[e].insert(s.id);
    }
  }
  for (const FeatureLiteral& lit : declared_features) {
    features.insert(lit);
    options.insert(lit.option);
    phi[lit];  // empty set allowed; lint warns about it
  }
}

const std::set<StatementId>& ProgramModel::phi_of(const FeatureLiteral& f) const {
  auto it = phi.find(f);
  return it == phi.end() ? empty_ : it->second;
}

const std::set<StatementId>& ProgramModel::defines_of(const Entity& e) const {
  auto it = define_map.find(e);
  return it == define_map.end() ? empty_ : it->second;
}

const std::set<StatementId>& ProgramModel::uses_of(const Entity& e) const {
  auto it = use_map.find(e);
  return it == use_map.end() ? empty_ : it->second;
}

void ConfigurationSuite::validate() const {
  std::set<std::string> ids;
  std::map<std::map<std::string, bool>, std::string> maps;
  for (const Configuration& c : configurations) {
    if (!ids.insert(c.id).second) throw InputError("duplicate configuration id " + c.id);
    auto [it, fresh] = maps.emplace(c.selections, c.id);
    if (!fresh)
      throw InputError("configurations " + it->second + " and " + c.id +
                       " have equal selection maps and are the same configuration");
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> with_verdict;
  for (const Verdict& v : verdicts) {
    if (!ids.count(v.config)) throw InputError("verdict for unknown configuration " + v.config);
    if (!seen.insert({v.config, v.test}).second)
      throw InputError("duplicate verdict for (" + v.config + ", " + v.test + ")");
    with_verdict.insert(v.config);
  }
  for (const Configuration& c : configurations)
    if (!with_verdict.count(c.id))
      throw InputError("configuration " + c.id + " has no verdicts");
}

const Configuration* ConfigurationSuite::find(const std::string& id) const {
  for (const Configuration& c : configurations)
    if (c.id == id) return &c;
  return nullptr;
}

std::vector<std::string> ConfigurationSuite::tests_of(const std::string& config_id) const {
  std::vector<std::string> out;
  for (const Verdict& v : verdicts)
    if (v.config == config_id) out.push_back(v.test);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<bool> ConfigurationSuite::verdict_of(const std::string& config_id,
                                                   const std::string& test_id) const {
  for (const Verdict& v : verdicts)
    if (v.config == config_id && v.test == test_id) return v.pass;
  return std::nullopt;
}

std::set<StatementId> statements_enabled(const ProgramModel& model, const Configuration& c) {
  for (const auto& [opt, value] : c.selections) {
    (void)value;
    if (!model.options.count(opt))
      throw InputError("configuration " + c.id + " selects unknown option " + opt);
  }
  for (const std::string& opt : model.options)
    if (!c.selections.count(opt))
      throw InputError("configuration " + c.id + " does not assign option " + opt);

  std::set<StatementId> out;
  for (const Statement& s : model.statements) {
    bool on = true;
    for (const FeatureLiteral& lit : s.pc)
      if (!c.satisfies(lit)) { on = false; break; }
    if (on) out.insert(s.id);
  }
  return out;
}

SuitePartition partition_suite(const ConfigurationSuite& suite) {
  suite.validate();
  SuitePartition part;
  std::set<std::string> failed;
  for (const Verdict& v : suite.verdicts)
    if (!v.pass) failed.insert(v.config);
  for (const Configuration& c : suite.configurations) {
    if (failed.count(c.id))
      part.failing.insert(c.id);
    else
      part.passing.insert(c.id);
  }
  return part;
}

}  // namespace cofl
