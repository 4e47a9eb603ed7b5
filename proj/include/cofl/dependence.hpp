#pragma once

#include <map>
#include <set>
#include <vector>

#include "cofl/dependence_types.hpp"
#include "cofl/interactions.hpp"
#include "cofl/model.hpp"

namespace cofl {

enum class EdgeKind { Data, Control };

struct DependenceGraph {
  int nodes = 0;
  // succ[s] / pred[s]: adjacency with edge labels; no self-edges.
  std::vector<std::vector<std::pair<StatementId, EdgeKind>>> succ;
  std::vector<std::vector<std::pair<StatementId, EdgeKind>>> pred;
};

// Data edges: s1 -> s2 whenever s1 defines an entity s2 uses. Control edges:
// condition statement -> statements it governs (control-parent relation).
DependenceGraph build_pdg(const ProgramModel& model);

enum class Direction { Forward, Backward, Both };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

// Reachability closure from `anchors` along the requested direction(s); the
// traversal runs on the full graph and the result is intersected with
// `restrict_to` (anchors included when they are in `restrict_to`).
std::set<StatementId> impact_closure(const DependenceGraph& g, const std::set<StatementId>& anchors,
                                     Direction direction, const std::set<StatementId>& restrict_to);

struct SuspiciousSet {
  std::set<StatementId> statements;
  struct Provenance {
    bool in_es = false, in_ds = false;
    bool es_forward = false, es_backward = false;
    bool ds_forward = false, ds_backward = false;
  };
  std::map<StatementId, Provenance> provenance;
};

// Validates executed ⊆ enabled for every trace; throws InputError otherwise.
void validate_trace(const ProgramModel& model, const ConfigurationSuite& suite,
                    const ExecutionTrace& trace);

// The ES/DS impact rule: candidates are statements executed in at least one
// failing witness configuration of ctx.spc; a candidate is suspicious when it
// has a dependence relation with ES (and with DS when DS is non-empty);
// statements inside feature blocks disabled by the SPC are excluded.
SuspiciousSet suspicious_statements(const ProgramModel& model, const InteractionContext& ctx,
                                    const std::vector<ExecutionTrace>& traces,
                                    const ConfigurationSuite& suite,
                                    Direction direction = Direction::Both);

}  // namespace cofl
