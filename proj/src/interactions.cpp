#include "cofl/interactions.hpp"

#include <algorithm>

namespace cofl {

namespace {

std::set<Entity> set_intersection(const std::set<Entity>& a, const std::set<Entity>& b) {
  std::set<Entity> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
  return out;
}

void add_all(std::set<StatementId>& into, const std::set<StatementId>& from) {
  into.insert(from.begin(), from.end());
}

std::set<StatementId> intersect_stmts(const std::set<StatementId>& a,
                                      const std::set<StatementId>& b) {
  std::set<StatementId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
  return out;
}

// rho restricted to an already-computed enabled-statement set.
std::set<Entity> propagation_enabled(const ProgramModel& model, const Entity& e,
                                     const std::set<StatementId>& enabled) {
  std::set<Entity> result;
  std::vector<Entity> frontier{e};
  while (!frontier.empty()) {
    Entity target = frontier.back();
    frontier.pop_back();
    for (StatementId sid : model.defines_of(target)) {
      if (!enabled.count(sid)) continue;
      for (const Entity& used : model.statements[static_cast<std::size_t>(sid)].uses) {
        if (result.insert(used).second) frontier.push_back(used);
      }
    }
  }
  return result;
}

// Entities that e1's value/body flows into (forward closure of def-use edges).
std::set<Entity> forward_flow(const ProgramModel& model, const Entity& e1,
                              const std::set<StatementId>& enabled) {
  std::set<Entity> result;
  std::vector<Entity> frontier{e1};
  while (!frontier.empty()) {
    Entity source = frontier.back();
    frontier.pop_back();
    for (StatementId sid : model.uses_of(source)) {
      if (!enabled.count(sid)) continue;
      for (const auto& [defined, kind] : model.statements[static_cast<std::size_t>(sid)].defs) {
        (void)kind;
        if (result.insert(defined).second) frontier.push_back(defined);
      }
    }
  }
  return result;
}

// Enabled statements lying on some def-use path from e1 to e2.
std::set<StatementId> chain_statements(const ProgramModel& model, const Entity& e1,
                                       const Entity& e2, const std::set<StatementId>& enabled) {
  std::set<Entity> fwd = forward_flow(model, e1, enabled);
  fwd.insert(e1);
  std::set<Entity> bwd = propagation_enabled(model, e2, enabled);
  bwd.insert(e2);
  std::set<Entity> on_path = set_intersection(fwd, bwd);

  std::set<StatementId> out;
  for (StatementId sid : enabled) {
    const Statement& s = model.statements[static_cast<std::size_t>(sid)];
    bool uses_on_path = false;
    for (const Entity& u : s.uses)
      if (on_path.count(u)) { uses_on_path = true; break; }
    if (!uses_on_path) continue;
    for (const auto& [d, kind] : s.defs) {
      (void)kind;
      if (on_path.count(d)) { out.insert(sid); break; }
    }
  }
  return out;
}

}  // namespace

const char* to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::DefDef: return "def-def";
    case InteractionKind::DefUse: return "def-use";
    case InteractionKind::PropagatedDefUse: return "propagated-def-use";
  }
  return "?";
}

FeatureEntitySets feature_def_use(const ProgramModel& model, const FeatureLiteral& f) {
  if (!model.features.count(f))
    throw InputError("feature " + to_string(f) + " is not part of the model");
  FeatureEntitySets out;
  out.feature = f;
  const std::set<StatementId>& block = model.phi_of(f);
  for (const Entity& e : model.entities) {
    if (!intersect_stmts(model.defines_of(e), block).empty()) out.def_set.insert(e);
    if (!intersect_stmts(model.uses_of(e), block).empty()) out.use_set.insert(e);
  }
  return out;
}

std::set<Entity> propagation(const ProgramModel& model, const Entity& e, const Configuration& c) {
  if (!model.entities.count(e)) throw InputError("entity " + e.str() + " is not in the model");
  return propagation_enabled(model, e, statements_enabled(model, c));
}

std::optional<Interaction> detect_interaction(const ProgramModel& model, const FeatureLiteral& f1,
                                              const FeatureLiteral& f2, const Configuration& c,
                                              bool propagation_on) {
  if (f1 == f2) throw InputError("interaction detection needs two distinct features");
  FeatureEntitySets a = feature_def_use(model, f1);
  FeatureEntitySets b = feature_def_use(model, f2);
  std::set<StatementId> enabled = statements_enabled(model, c);

  Interaction inter;
  inter.f1 = f1;
  inter.f2 = f2;
  bool def_def = false, def_use = false, propagated = false;

  for (const Entity& e : set_intersection(a.def_set, b.def_set)) {
    def_def = true;
    inter.mediating.insert(e);
    add_all(inter.implementation,
            intersect_stmts(model.defines_of(e), model.phi_of(f1)));
    add_all(inter.implementation,
            intersect_stmts(model.defines_of(e), model.phi_of(f2)));
  }

  auto def_use_clause = [&](const FeatureEntitySets& def_side, const FeatureEntitySets& use_side) {
    for (const Entity& e : set_intersection(def_side.def_set, use_side.use_set)) {
      def_use = true;
      inter.mediating.insert(e);
      add_all(inter.implementation,
              intersect_stmts(model.defines_of(e), model.phi_of(def_side.feature)));
      add_all(inter.implementation,
              intersect_stmts(model.uses_of(e), model.phi_of(use_side.feature)));
    }
  };
  def_use_clause(a, b);
  def_use_clause(b, a);

  if (propagation_on) {
    auto propagated_clause = [&](const FeatureEntitySets& def_side,
                                 const FeatureEntitySets& use_side) {
      for (const Entity& e2 : use_side.use_set) {
        std::set<Entity> rho = propagation_enabled(model, e2, enabled);
        for (const Entity& e1 : def_side.def_set) {
          if (e1 == e2) continue;  // direct sharing is the def-use clause
          if (!rho.count(e1)) continue;
          propagated = true;
          inter.mediating.insert(e1);
          inter.mediating.insert(e2);
          add_all(inter.implementation,
                  intersect_stmts(model.defines_of(e1), model.phi_of(def_side.feature)));
          add_all(inter.implementation,
                  intersect_stmts(model.uses_of(e2), model.phi_of(use_side.feature)));
          add_all(inter.implementation, chain_statements(model, e1, e2, enabled));
        }
      }
    };
    propagated_clause(a, b);
    propagated_clause(b, a);
  }

  if (!def_def && !def_use && !propagated) return std::nullopt;
  inter.kind = def_def   ? InteractionKind::DefDef
               : def_use ? InteractionKind::DefUse
                         : InteractionKind::PropagatedDefUse;
  return inter;
}

InteractionContext build_interaction_context(const ProgramModel& model,
                                             const SuspiciousPartialConfiguration& spc,
                                             const ConfigurationSuite& suite,
                                             bool propagation_on) {
  InteractionContext ctx;
  ctx.spc = spc;

  for (const FeatureSelection& sel : spc.selections.selections) {
    FeatureLiteral as_is{sel.option, sel.value};
    if (model.features.count(as_is)) ctx.enabled.push_back(as_is);
    if (!sel.value) {
      FeatureLiteral positive{sel.option, true};
      if (model.features.count(positive)) ctx.disabled.push_back(positive);
    }
  }

  if (spc.witness_failing.empty())
    throw InputError("SPC " + spc.selections.str() + " has no failing witness configuration");
  ctx.witness_config = *std::min_element(spc.witness_failing.begin(), spc.witness_failing.end());
  const Configuration* witness = suite.find(ctx.witness_config);
  if (!witness)
    throw InputError("witness configuration " + ctx.witness_config + " is not in the suite");

  if (ctx.enabled.size() < 2)
    ctx.warnings.push_back("SPC " + spc.selections.str() +
                           " selects fewer than two features present in the code; "
                           "no enabled-enabled interactions exist");

  for (std::size_t i = 0; i < ctx.enabled.size(); ++i)
    for (std::size_t j = i + 1; j < ctx.enabled.size(); ++j) {
      auto inter =
          detect_interaction(model, ctx.enabled[i], ctx.enabled[j], *witness, propagation_on);
      if (!inter) continue;
      add_all(ctx.es, inter->implementation);
      ctx.interactions.push_back(std::move(*inter));
    }

  for (const FeatureLiteral& fe : ctx.enabled)
    for (const FeatureLiteral& fd : ctx.disabled) {
      if (fe.option == fd.option && fe.value == fd.value) continue;
      auto inter = detect_interaction(model, fe, fd, *witness, propagation_on);
      if (!inter) continue;
      add_all(ctx.ds, inter->implementation);
      ctx.interactions.push_back(std::move(*inter));
    }

  return ctx;
}

}  // namespace cofl
