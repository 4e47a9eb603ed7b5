#include "cofl/ranking.hpp"

#include <algorithm>
#include <cmath>

namespace cofl {

int SpectrumCounters::n_cf(StatementId s) const {
  auto it = covered_failing.find(s);
  return it == covered_failing.end() ? 0 : it->second;
}

int SpectrumCounters::n_cs(StatementId s) const {
  auto it = covered_passing.find(s);
  return it == covered_passing.end() ? 0 : it->second;
}

SpectrumCounters count_spectra(const std::vector<ExecutionTrace>& traces,
                               const ConfigurationSuite& suite) {
  suite.validate();
  SpectrumCounters out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const ExecutionTrace& t : traces) {
    std::optional<bool> verdict = suite.verdict_of(t.config, t.test);
    if (!verdict)
      throw InputError("trace (" + t.config + ", " + t.test + ") has no verdict in the suite");
    if (!seen.insert({t.config, t.test}).second)
      throw InputError("duplicate trace for (" + t.config + ", " + t.test + ")");
    if (*verdict) {
      ++out.total_passing;
      for (StatementId s : t.executed) ++out.covered_passing[s];
    } else {
      ++out.total_failing;
      for (StatementId s : t.executed) ++out.covered_failing[s];
    }
  }
  return out;
}

const char* to_string(Formula f) {
  return f == Formula::Tarantula ? "tarantula" : "ochiai";
}

Formula formula_from_string(const std::string& s) {
  if (s == "tarantula") return Formula::Tarantula;
  if (s == "ochiai") return Formula::Ochiai;
  throw InputError("unknown formula '" + s + "' (tarantula|ochiai)");
}

const char* to_string(RankMode m) { return m == RankMode::Baseline ? "baseline" : "cofl"; }

double tarantula(const SpectrumCounters& c, StatementId s) {
  if (c.total_failing <= 0)
    throw InputError("tarantula needs at least one failing test");
  int ncf = c.n_cf(s), ncs = c.n_cs(s);
  if (ncf == 0) return 0.0;
  double fail_ratio = static_cast<double>(ncf) / c.total_failing;
  double pass_ratio = c.total_passing > 0 ? static_cast<double>(ncs) / c.total_passing : 0.0;
  return fail_ratio / (fail_ratio + pass_ratio);
}

double ochiai(const SpectrumCounters& c, StatementId s) {
  if (c.total_failing <= 0)
    throw InputError("ochiai needs at least one failing test");
  int ncf = c.n_cf(s), ncs = c.n_cs(s);
  if (ncf == 0) return 0.0;
  double denom = std::sqrt(static_cast<double>(c.total_failing) * (ncf + ncs));
  if (denom == 0.0) return 0.0;
  return ncf / denom;
}

double suspiciousness(const SpectrumCounters& c, StatementId s, Formula f) {
  return f == Formula::Tarantula ? tarantula(c, s) : ochiai(c, s);
}

RankedReport rank(const std::set<StatementId>& domain, const SpectrumCounters& counters,
                  Formula formula, RankMode mode) {
  if (domain.empty())
    throw InputError("ranking domain is empty: the SPC produced no suspicious statements "
                     "(try --mode baseline, another --direction, or --propagation on)");
  RankedReport report;
  report.mode = mode;
  report.formula = formula;
  report.sds = static_cast<int>(domain.size());
  for (StatementId s : domain)
    report.entries.push_back({s, suspiciousness(counters, s, formula), 0});
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.stmt < b.stmt;
                   });
  // Pessimistic ties: every member of a tie gets the position of its last member.
  std::size_t i = 0;
  while (i < report.entries.size()) {
    std::size_t j = i;
    while (j + 1 < report.entries.size() &&
           report.entries[j + 1].score == report.entries[i].score)
      ++j;
    for (std::size_t k = i; k <= j; ++k)
      report.entries[k].rank = static_cast<int>(j) + 1;
    i = j + 1;
  }
  return report;
}

std::optional<double> exam(const RankedReport& report, const std::set<StatementId>& faulty,
                           int total_statements) {
  if (faulty.empty()) throw InputError("EXAM needs a non-empty faulty statement set");
  if (total_statements < static_cast<int>(report.entries.size()))
    throw InputError("EXAM total statement count is smaller than the ranked domain");
  std::optional<int> best;
  for (const RankedEntry& e : report.entries)
    if (faulty.count(e.stmt) && (!best || e.rank < *best)) best = e.rank;
  if (!best) return std::nullopt;  // miss
  return 100.0 * static_cast<double>(*best) / static_cast<double>(total_statements);
}

}  // namespace cofl
