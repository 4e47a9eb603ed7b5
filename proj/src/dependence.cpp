#include "cofl/dependence.hpp"

#include <algorithm>

namespace cofl {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Both: return "both";
  }
  return "?";
}

Direction direction_from_string(const std::string& s) {
  if (s == "forward") return Direction::Forward;
  if (s == "backward") return Direction::Backward;
  if (s == "both") return Direction::Both;
  throw InputError("unknown dependence direction '" + s + "' (forward|backward|both)");
}

DependenceGraph build_pdg(const ProgramModel& model) {
  DependenceGraph g;
  g.nodes = static_cast<int>(model.statements.size());
  g.succ.resize(model.statements.size());
  g.pred.resize(model.statements.size());

  std::set<std::pair<StatementId, StatementId>> seen_data;
  for (const auto& [entity, def_sites] : model.define_map) {
    const std::set<StatementId>& use_sites = model.uses_of(entity);
    for (StatementId d : def_sites)
      for (StatementId u : use_sites) {
        if (d == u) continue;
        if (!seen_data.insert({d, u}).second) continue;
        g.succ[static_cast<std::size_t>(d)].push_back({u, EdgeKind::Data});
        g.pred[static_cast<std::size_t>(u)].push_back({d, EdgeKind::Data});
      }
  }
  for (const Statement& s : model.statements) {
    if (!s.control_parent) continue;
    StatementId p = *s.control_parent;
    if (p == s.id) continue;
    g.succ[static_cast<std::size_t>(p)].push_back({s.id, EdgeKind::Control});
    g.pred[static_cast<std::size_t>(s.id)].push_back({p, EdgeKind::Control});
  }
  for (auto& adj : g.succ)
    std::sort(adj.begin(), adj.end());
  for (auto& adj : g.pred)
    std::sort(adj.begin(), adj.end());
  return g;
}

namespace {

std::set<StatementId> reach(const DependenceGraph& g, const std::set<StatementId>& anchors,
                            bool forward) {
  const auto& adj = forward ? g.succ : g.pred;
  std::set<StatementId> seen = anchors;
  std::vector<StatementId> frontier(anchors.begin(), anchors.end());
  while (!frontier.empty()) {
    StatementId s = frontier.back();
    frontier.pop_back();
    for (const auto& [next, kind] : adj[static_cast<std::size_t>(s)]) {
      (void)kind;
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  return seen;
}

}  // namespace

std::set<StatementId> impact_closure(const DependenceGraph& g, const std::set<StatementId>& anchors,
                                     Direction direction, const std::set<StatementId>& restrict_to) {
  for (StatementId a : anchors)
    if (a < 0 || a >= g.nodes) throw InputError("impact anchor " + std::to_string(a) + " is not a node");
  std::set<StatementId> closure;
  if (direction == Direction::Forward || direction == Direction::Both) {
    std::set<StatementId> f = reach(g, anchors, /*forward=*/true);
    closure.insert(f.begin(), f.end());
  }
  if (direction == Direction::Backward || direction == Direction::Both) {
    std::set<StatementId> b = reach(g, anchors, /*forward=*/false);
    closure.insert(b.begin(), b.end());
  }
  std::set<StatementId> out;
  std::set_intersection(closure.begin(), closure.end(), restrict_to.begin(), restrict_to.end(),
                        std::inserter(out, out.begin()));
  return out;
}

void validate_trace(const ProgramModel& model, const ConfigurationSuite& suite,
                    const ExecutionTrace& trace) {
  const Configuration* cfg = suite.find(trace.config);
  if (!cfg) throw InputError("trace references unknown configuration " + trace.config);
  std::set<StatementId> enabled = statements_enabled(model, *cfg);
  for (StatementId s : trace.executed) {
    if (s < 0 || s >= static_cast<StatementId>(model.statements.size()))
      throw InputError("trace (" + trace.config + ", " + trace.test + ") references unknown statement " +
                       std::to_string(s));
    if (!enabled.count(s))
      throw InputError("trace (" + trace.config + ", " + trace.test + ") executes statement " +
                       std::to_string(s) + " which is disabled under " + trace.config +
                       "; model and trace do not match");
  }
}

SuspiciousSet suspicious_statements(const ProgramModel& model, const InteractionContext& ctx,
                                    const std::vector<ExecutionTrace>& traces,
                                    const ConfigurationSuite& suite, Direction direction) {
  for (const ExecutionTrace& t : traces) validate_trace(model, suite, t);

  // Candidate universe: statements executed in >= 1 failing witness config.
  std::set<StatementId> candidates;
  for (const std::string& w : ctx.spc.witness_failing) {
    for (const std::string& test : suite.tests_of(w)) {
      const ExecutionTrace* found = nullptr;
      for (const ExecutionTrace& t : traces)
        if (t.config == w && t.test == test) { found = &t; break; }
      if (!found)
        throw InputError("missing execution trace for (" + w + ", " + test + ")");
      candidates.insert(found->executed.begin(), found->executed.end());
    }
  }

  DependenceGraph g = build_pdg(model);

  auto related = [&](const std::set<StatementId>& anchors, bool forward) {
    return reach(g, anchors, forward);
  };
  std::set<StatementId> es_fwd, es_bwd, ds_fwd, ds_bwd;
  if (direction == Direction::Forward || direction == Direction::Both) {
    es_fwd = related(ctx.es, true);
    ds_fwd = related(ctx.ds, true);
  }
  if (direction == Direction::Backward || direction == Direction::Both) {
    es_bwd = related(ctx.es, false);
    ds_bwd = related(ctx.ds, false);
  }
  // "Forward impact" of a statement s on an anchor means s reaches the anchor,
  // i.e. s lies in the backward reach of the anchor set; both sets together
  // cover "impacted by or have dependency impact on".
  auto in_relation = [&](StatementId s) {
    bool es = es_fwd.count(s) || es_bwd.count(s);
    if (!es) return false;
    if (ctx.ds.empty()) return true;
    return ds_fwd.count(s) != 0 || ds_bwd.count(s) != 0;
  };

  SuspiciousSet out;
  for (StatementId s : candidates) {
    if (!in_relation(s)) continue;
    // Statements inside a feature block the SPC disables are never reported.
    bool in_disabled_block = false;
    for (const FeatureLiteral& lit : model.statements[static_cast<std::size_t>(s)].pc)
      if (ctx.spc.selections.contains({lit.option, !lit.value})) { in_disabled_block = true; break; }
    if (in_disabled_block) continue;
    out.statements.insert(s);
    SuspiciousSet::Provenance prov;
    prov.in_es = ctx.es.count(s) != 0;
    prov.in_ds = ctx.ds.count(s) != 0;
    prov.es_forward = es_fwd.count(s) != 0;
    prov.es_backward = es_bwd.count(s) != 0;
    prov.ds_forward = ds_fwd.count(s) != 0;
    prov.ds_backward = ds_bwd.count(s) != 0;
    out.provenance[s] = prov;
  }
  return out;
}

}  // namespace cofl
