#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cofl/dependence_types.hpp"
#include "cofl/model.hpp"

namespace cofl {

// Per-test coverage counters across the whole suite.
struct SpectrumCounters {
  std::map<StatementId, int> covered_failing;  // N_CF per statement
  std::map<StatementId, int> covered_passing;  // N_CS per statement
  int total_failing = 0;                       // N_F
  int total_passing = 0;                       // N_S

  int n_cf(StatementId s) const;
  int n_cs(StatementId s) const;
};

// Every trace's (config, test) must carry a verdict; a statement covered
// twice within one test counts once.
SpectrumCounters count_spectra(const std::vector<ExecutionTrace>& traces,
                               const ConfigurationSuite& suite);

enum class Formula { Tarantula, Ochiai };

const char* to_string(Formula f);
Formula formula_from_string(const std::string& s);

// Both formulas require N_F > 0 and return 0 when N_CF = 0.
double tarantula(const SpectrumCounters& c, StatementId s);
double ochiai(const SpectrumCounters& c, StatementId s);
double suspiciousness(const SpectrumCounters& c, StatementId s, Formula f);

enum class RankMode { Baseline, Cofl };

const char* to_string(RankMode m);

struct RankedEntry {
  StatementId stmt = -1;
  double score = 0.0;
  int rank = 0;  // ties share the worst (largest) rank
};

struct RankedReport {
  std::vector<RankedEntry> entries;  // score-descending, then statement id
  RankMode mode = RankMode::Cofl;
  Formula formula = Formula::Tarantula;
  int sds = 0;  // |domain|
};

// Throws InputError when the domain is empty (nothing suspicious to rank).
RankedReport rank(const std::set<StatementId>& domain, const SpectrumCounters& counters,
                  Formula formula, RankMode mode = RankMode::Cofl);

// Pessimistic rank of the first faulty statement as a percentage of
// total_statements; nullopt when no faulty statement is in the domain.
std::optional<double> exam(const RankedReport& report, const std::set<StatementId>& faulty,
                           int total_statements);

}  // namespace cofl
