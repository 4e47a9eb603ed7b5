#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cofl/model.hpp"
#include "cofl/spc.hpp"

namespace cofl {

struct FeatureEntitySets {
  FeatureLiteral feature;
  std::set<Entity> def_set;  // entities with a definition inside phi(feature)
  std::set<Entity> use_set;  // entities with a use inside phi(feature)
};

// def(f) / use(f). Throws InputError when f is not a feature of the model.
FeatureEntitySets feature_def_use(const ProgramModel& model, const FeatureLiteral& f);

// rho(e, c): entities whose defined value/body flows, transitively through
// statements enabled under c, into e.
std::set<Entity> propagation(const ProgramModel& model, const Entity& e, const Configuration& c);

enum class InteractionKind { DefDef, DefUse, PropagatedDefUse };

const char* to_string(InteractionKind k);

struct Interaction {
  FeatureLiteral f1, f2;
  InteractionKind kind = InteractionKind::DefDef;  // strongest clause present
  std::set<Entity> mediating;
  std::set<StatementId> implementation;
};

// Absent when the features share entities only through uses, or share nothing.
std::optional<Interaction> detect_interaction(const ProgramModel& model, const FeatureLiteral& f1,
                                              const FeatureLiteral& f2, const Configuration& c,
                                              bool propagation_on = true);

struct InteractionContext {
  SuspiciousPartialConfiguration spc;
  std::set<StatementId> es;  // interactions among the enabled SPC literals
  std::set<StatementId> ds;  // interactions between enabled literals and disabled options
  std::string witness_config;
  std::vector<FeatureLiteral> enabled;   // f_E
  std::vector<FeatureLiteral> disabled;  // f_D, as (option, true) literals
  std::vector<Interaction> interactions;
  std::vector<std::string> warnings;
};

InteractionContext build_interaction_context(const ProgramModel& model,
                                             const SuspiciousPartialConfiguration& spc,
                                             const ConfigurationSuite& suite,
                                             bool propagation_on = true);

}  // namespace cofl
