#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cofl/ast.hpp"
#include "cofl/dependence_types.hpp"
#include "cofl/model.hpp"
#include "cofl/parser.hpp"
#include "cofl/ranking.hpp"
#include "cofl/spc.hpp"

namespace cofl {

struct ParsedProgram {
  std::unique_ptr<ast::Program> program;
  ProgramModel model;
};

// Parses a single unit; throws InputError carrying the diagnostics on failure.
ParsedProgram parse_program(const SourceUnit& unit);

struct RunOutcome {
  long long result = 0;
  bool fault = false;  // out-of-bounds access or fuel exhausted
  std::set<StatementId> trace;
};

// Executes `entry`(input) under configuration c. Trace events: top-level
// statements at startup, assignments, calls, returns, initialized local
// declarations, and condition evaluations. Headers of function definitions
// and bare local declarations are not executable. Reads of entities without
// an enabled definition yield 0.
RunOutcome interpret(const ParsedProgram& program, const Configuration& c,
                     const std::string& entry, long long input, std::uint64_t fuel = 500000);

// --- desk-scale experiment -------------------------------------------------

enum class MutationKind { OffByOneBound, WrongInitializer, InvertedGuard, WrongAssignTarget };

const char* to_string(MutationKind k);
MutationKind mutation_kind_from_string(const std::string& s);

struct SeededBug {
  MutationKind kind = MutationKind::WrongInitializer;
  StatementId target = -1;        // faulty statement in the mutated program
  SelectionSet intended;          // fault-causing selections (brute-force validated)
  int arity = 0;                  // |intended|
  std::string description;
};

struct SeedResult {
  SourceUnit mutated;
  SeededBug bug;
};

// Deterministic program generator; same seed yields byte-identical output.
// Bounds: options <= 16, functions <= 40.
SourceUnit generate_program(std::uint64_t seed, int options, int functions);

// Mutates exactly one statement of `program`; the resulting bug is validated
// to be configuration-dependent on the simulated test oracle (some sampled
// configuration passes and some fails); non-CD mutations are resampled.
SeedResult seed_bug(const SourceUnit& program, MutationKind kind, std::uint64_t rng_seed);

struct CorpusSpec {
  int bugs = 32;
  std::uint64_t seed = 1;
  int options = 6;     // <= 7 samples configurations exhaustively, else 100 random
  int functions = 4;
  int tests = 5;       // entry inputs 0..tests-1
};

struct ModeMetrics {
  std::optional<double> exam;  // nullopt = miss
  std::optional<int> rank;
  int sds = 0;
};

struct ExperimentRow {
  int bug = 0;
  MutationKind kind = MutationKind::WrongInitializer;
  int arity = 0;
  std::string intended;
  bool cofl_retained = false;
  double wall_ms = 0.0;
  // metrics[mode][formula]: mode 0 = baseline, 1 = cofl; formula 0 = tarantula, 1 = ochiai
  ModeMetrics metrics[2][2];
};

struct ExperimentAggregates {
  double mean_exam[2][2] = {};  // over rows where EXAM is defined
  double mean_sds[2][2] = {};
  int misses[2][2] = {};
  double retention_rate = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  ExperimentAggregates aggregates;
};

ExperimentResult run_experiment(const CorpusSpec& spec, int jobs = 1);

ExperimentAggregates recompute_aggregates(const std::vector<ExperimentRow>& rows);

std::string experiment_table_text(const ExperimentResult& result);
std::string experiment_table_json(const ExperimentResult& result);

// Builds the bug's suite and traces (shared by run_experiment and tests).
struct BugEvaluationInput {
  ParsedProgram pristine;
  ParsedProgram mutated;
  SeededBug bug;
  ConfigurationSuite suite;
  std::vector<ExecutionTrace> traces;
};

BugEvaluationInput prepare_bug(const CorpusSpec& spec, int bug_index);

}  // namespace cofl
