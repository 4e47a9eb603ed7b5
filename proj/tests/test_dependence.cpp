#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "cofl/dependence.hpp"
#include "cofl/interactions.hpp"
#include "cofl/spc.hpp"
#include "support.hpp"

using namespace cofl;
using testsupport::kernel_mini_model;
using testsupport::kernel_mini_suite;
using testsupport::kernel_mini_traces;
using testsupport::lines_of;

namespace {

bool has_edge(const DependenceGraph& g, StatementId from, StatementId to, EdgeKind kind) {
  for (const auto& [next, k] : g.succ[static_cast<std::size_t>(from)])
    if (next == to && k == kind) return true;
  return false;
}

InteractionContext kernel_mini_context() {
  ProgramModel model = kernel_mini_model();
  std::vector<SuspiciousPartialConfiguration> spcs = detect_spcs(kernel_mini_suite());
  REQUIRE(spcs.size() == 1);
  return build_interaction_context(model, spcs.front(), kernel_mini_suite());
}

std::set<StatementId> executed_in(const std::string& config) {
  std::set<StatementId> out;
  for (const ExecutionTrace& t : kernel_mini_traces())
    if (t.config == config) out.insert(t.executed.begin(), t.executed.end());
  return out;
}

}  // namespace

TEST_CASE("MAX_ORDER's definition feeds lines 11, 12 and 22") {
  ProgramModel model = kernel_mini_model();
  DependenceGraph g = build_pdg(model);
  // Statement 0 is the line-1 macro; 3, 4, 15 sit on lines 11, 12, 22.
  CHECK(has_edge(g, 0, 3, EdgeKind::Data));
  CHECK(has_edge(g, 0, 4, EdgeKind::Data));
  CHECK(has_edge(g, 0, 15, EdgeKind::Data));
}

TEST_CASE("straight-line independent statements produce no edges") {
  ParseResult r = parse({SourceUnit{"s.cvl", "int a;\nint b;\nint c;\n"}});
  REQUIRE(r.ok());
  DependenceGraph g = build_pdg(r.model);
  for (const auto& adj : g.succ) CHECK(adj.empty());
}

TEST_CASE("diamond: both branches define x, the join uses it") {
  ParseResult r = parse({SourceUnit{"d.cvl",
                                    "int x; int y;\n"
                                    "void f(int p) {\n"
                                    "  if (p) { x = 1; } else { x = 2; }\n"
                                    "  y = x;\n"
                                    "}\n"}});
  REQUIRE(r.ok());
  // Statements: 0 "int x;", 1 "int y;", 2 header, 3 if-cond, 4 "x = 1",
  // 5 "x = 2", 6 "y = x".
  DependenceGraph g = build_pdg(r.model);
  CHECK(has_edge(g, 4, 6, EdgeKind::Data));
  CHECK(has_edge(g, 5, 6, EdgeKind::Data));
  CHECK(has_edge(g, 3, 4, EdgeKind::Control));
  CHECK(has_edge(g, 3, 5, EdgeKind::Control));
}

TEST_CASE("closure of an empty anchor set is empty") {
  DependenceGraph g = build_pdg(kernel_mini_model());
  std::set<StatementId> everything;
  for (int i = 0; i < g.nodes; ++i) everything.insert(i);
  CHECK(impact_closure(g, {}, Direction::Both, everything).empty());
}

TEST_CASE("backward closure of a chain collects the whole chain") {
  ParseResult r = parse({SourceUnit{"c.cvl",
                                    "int a; int b; int c;\n"
                                    "void f() { a = 1; b = a; c = b; }\n"}});
  REQUIRE(r.ok());
  // 0..2 decls, 3 header, 4 a=1, 5 b=a, 6 c=b.
  DependenceGraph g = build_pdg(r.model);
  std::set<StatementId> everything;
  for (int i = 0; i < g.nodes; ++i) everything.insert(i);
  std::set<StatementId> closure = impact_closure(g, {6}, Direction::Backward, everything);
  CHECK(closure.count(4));
  CHECK(closure.count(5));
  CHECK(closure.count(6));
}

TEST_CASE("ES impact closure restricted to the c7 trace") {
  ProgramModel model = kernel_mini_model();
  DependenceGraph g = build_pdg(model);
  InteractionContext ctx = kernel_mini_context();
  std::set<StatementId> closure =
      impact_closure(g, ctx.es, Direction::Both, executed_in("c7"));
  CHECK(lines_of(model, closure) == std::set<int>{1, 4, 11, 12, 16, 22, 24});
  // Superset check against the final suspicious set.
  for (int line : {1, 11, 12, 22}) CHECK(lines_of(model, closure).count(line));
}

TEST_CASE("suspicious statements of the running example are lines 1, 11, 12, 22") {
  ProgramModel model = kernel_mini_model();
  SuspiciousSet susp = suspicious_statements(model, kernel_mini_context(), kernel_mini_traces(),
                                             kernel_mini_suite());
  CHECK(lines_of(model, susp.statements) == std::set<int>{1, 11, 12, 22});
  CHECK(susp.statements.size() == 4);
}

TEST_CASE("with no disabled features the rule reduces to the ES relation") {
  ParseResult r = parse({SourceUnit{"n.cvl",
                                    "int g; int h;\n"
                                    "#ifdef A\nvoid fa() { g = 1; }\n#endif\n"
                                    "#ifdef B\nvoid fb() { h = g; }\n#endif\n"
                                    "int isolated;\n"}});
  REQUIRE(r.ok());
  ConfigurationSuite suite = testsupport::make_suite({"A", "B"}, {"TT", "TF", "FT", "FF"}, {0});
  std::vector<SuspiciousPartialConfiguration> spcs = detect_spcs(suite);
  REQUIRE(spcs.size() == 1);
  InteractionContext ctx = build_interaction_context(r.model, spcs.front(), suite);
  CHECK(ctx.ds.empty());

  // Trace: every enabled statement except headers/bare decls executes.
  std::vector<ExecutionTrace> traces;
  for (const Configuration& c : suite.configurations) {
    ExecutionTrace t;
    t.config = c.id;
    t.test = "t";
    for (StatementId s : statements_enabled(r.model, c)) {
      const Statement& st = r.model.statements[static_cast<std::size_t>(s)];
      bool is_header = st.text.find("(...)") != std::string::npos;
      bool is_bare_decl = st.text.rfind("int ", 0) == 0 && st.text.find('=') == std::string::npos;
      if (!is_header && !is_bare_decl) t.executed.insert(s);
    }
    traces.push_back(std::move(t));
  }
  SuspiciousSet susp = suspicious_statements(r.model, ctx, traces, suite);
  DependenceGraph g = build_pdg(r.model);
  std::set<StatementId> candidates;
  for (const ExecutionTrace& t : traces)
    if (t.config == "k0") candidates.insert(t.executed.begin(), t.executed.end());
  CHECK(susp.statements == impact_closure(g, ctx.es, Direction::Both, candidates));
  // The isolated declaration never shows up.
  for (StatementId s : susp.statements)
    CHECK(r.model.statements[static_cast<std::size_t>(s)].text.find("isolated") ==
          std::string::npos);
}

TEST_CASE("executed but dependence-isolated statements stay out") {
  ProgramModel model = kernel_mini_model();
  SuspiciousSet susp = suspicious_statements(model, kernel_mini_context(), kernel_mini_traces(),
                                             kernel_mini_suite());
  // node = 0 (statement 13) and lock = ... (statement 14) execute in the
  // witnesses but have no dependence relation with ES.
  CHECK_FALSE(susp.statements.count(13));
  CHECK_FALSE(susp.statements.count(14));
}

TEST_CASE("suspicious output is within executed-and-enabled statements of witnesses") {
  ProgramModel model = kernel_mini_model();
  ConfigurationSuite suite = kernel_mini_suite();
  InteractionContext ctx = kernel_mini_context();
  SuspiciousSet susp = suspicious_statements(model, ctx, kernel_mini_traces(), suite);
  std::set<StatementId> executed;
  for (const std::string& w : ctx.spc.witness_failing) {
    auto e = executed_in(w);
    executed.insert(e.begin(), e.end());
  }
  for (StatementId s : susp.statements) {
    CHECK(executed.count(s));
    for (const std::string& w : ctx.spc.witness_failing)
      if (executed_in(w).count(s))
        CHECK(statements_enabled(model, *suite.find(w)).count(s));
  }
}

TEST_CASE("the DS clause only filters the DS-empty result") {
  ProgramModel model = kernel_mini_model();
  InteractionContext ctx = kernel_mini_context();
  SuspiciousSet with_ds = suspicious_statements(model, ctx, kernel_mini_traces(),
                                                kernel_mini_suite());
  InteractionContext no_ds = ctx;
  no_ds.ds.clear();
  SuspiciousSet without_ds = suspicious_statements(model, no_ds, kernel_mini_traces(),
                                                   kernel_mini_suite());
  for (StatementId s : with_ds.statements) CHECK(without_ds.statements.count(s));
  CHECK(with_ds.statements.size() <= without_ds.statements.size());
}

TEST_CASE("impact closure is monotone in anchors and in the restriction") {
  ProgramModel model = kernel_mini_model();
  DependenceGraph g = build_pdg(model);
  std::mt19937_64 rng(5);
  std::set<StatementId> everything;
  for (int i = 0; i < g.nodes; ++i) everything.insert(i);
  for (int round = 0; round < 50; ++round) {
    std::set<StatementId> small_anchor, big_anchor, small_restrict, big_restrict;
    for (int i = 0; i < g.nodes; ++i) {
      if (rng() % 4 == 0) small_anchor.insert(i);
      if (rng() % 3 == 0) big_restrict.insert(i);
    }
    big_anchor = small_anchor;
    big_anchor.insert(static_cast<StatementId>(rng() % g.nodes));
    small_restrict = big_restrict;
    if (!small_restrict.empty()) small_restrict.erase(*small_restrict.begin());
    for (Direction d : {Direction::Forward, Direction::Backward, Direction::Both}) {
      auto a = impact_closure(g, small_anchor, d, big_restrict);
      auto b = impact_closure(g, big_anchor, d, big_restrict);
      for (StatementId s : a) CHECK(b.count(s));
      auto c = impact_closure(g, small_anchor, d, small_restrict);
      for (StatementId s : c) CHECK(a.count(s));
    }
  }
}

TEST_CASE("a trace executing a disabled statement is a model/trace mismatch") {
  ProgramModel model = kernel_mini_model();
  ConfigurationSuite suite = kernel_mini_suite();
  ExecutionTrace bad;
  bad.config = "c4";  // SLAB=F, statement 3 is disabled
  bad.test = "t1";
  bad.executed = {3};
  CHECK_THROWS_AS(validate_trace(model, suite, bad), InputError);
}

TEST_CASE("a missing witness trace is reported with its coordinates") {
  ProgramModel model = kernel_mini_model();
  std::vector<ExecutionTrace> traces = kernel_mini_traces();
  traces.erase(std::remove_if(traces.begin(), traces.end(),
                              [](const ExecutionTrace& t) { return t.config == "c7"; }),
               traces.end());
  try {
    suspicious_statements(model, kernel_mini_context(), traces, kernel_mini_suite());
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("c7") != std::string::npos);
    CHECK(std::string(e.what()).find("t1") != std::string::npos);
  }
}

TEST_CASE("suspicious computation is deterministic across repeated runs") {
  ProgramModel model = kernel_mini_model();
  SuspiciousSet first = suspicious_statements(model, kernel_mini_context(), kernel_mini_traces(),
                                              kernel_mini_suite());
  for (int i = 0; i < 5; ++i) {
    SuspiciousSet again = suspicious_statements(model, kernel_mini_context(),
                                                kernel_mini_traces(), kernel_mini_suite());
    CHECK(again.statements == first.statements);
  }
}
