#pragma once

#include <set>
#include <string>
#include <vector>

#include "cofl/json_io.hpp"
#include "cofl/model.hpp"
#include "cofl/parser.hpp"

namespace testsupport {

inline std::string fixture(const std::string& name) {
  return std::string(COFL_FIXTURE_DIR) + "/" + name;
}

inline cofl::ProgramModel kernel_mini_model() {
  return cofl::load_model(fixture("kernel_mini.cvl"));
}

inline cofl::ParseResult kernel_mini_parse() {
  std::string text = cofl::read_file(fixture("kernel_mini.cvl"));
  return cofl::parse({cofl::SourceUnit{"kernel_mini.cvl", text}});
}

inline cofl::ConfigurationSuite kernel_mini_suite() {
  return cofl::suite_from_json(cofl::read_file(fixture("kernel_mini.suite.json")));
}

// The seven configurations named by the running example.
inline cofl::ConfigurationSuite kernel_mini_suite7() {
  cofl::ConfigurationSuite full = kernel_mini_suite();
  cofl::ConfigurationSuite out;
  std::set<std::string> keep{"c1", "c2", "c3", "c4", "c5", "c6", "c7"};
  for (const cofl::Configuration& c : full.configurations)
    if (keep.count(c.id)) out.configurations.push_back(c);
  for (const cofl::Verdict& v : full.verdicts)
    if (keep.count(v.config)) out.verdicts.push_back(v);
  return out;
}

inline std::vector<cofl::ExecutionTrace> kernel_mini_traces() {
  return cofl::traces_from_ndjson(cofl::read_file(fixture("kernel_mini.traces.ndjson")));
}

inline std::set<int> lines_of(const cofl::ProgramModel& model,
                              const std::set<cofl::StatementId>& stmts) {
  std::set<int> lines;
  for (cofl::StatementId s : stmts)
    lines.insert(model.statements[static_cast<std::size_t>(s)].line_begin);
  return lines;
}

// Compact suite construction for synthetic cases: each configuration is a
// string of 'T'/'F' over the given options; failing ids listed separately.
inline cofl::ConfigurationSuite make_suite(const std::vector<std::string>& options,
                                           const std::vector<std::string>& rows,
                                           const std::set<int>& failing_rows) {
  cofl::ConfigurationSuite suite;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    cofl::Configuration c;
    c.id = "k" + std::to_string(r);
    for (std::size_t i = 0; i < options.size(); ++i) c.selections[options[i]] = rows[r][i] == 'T';
    suite.configurations.push_back(std::move(c));
    suite.verdicts.push_back({"k" + std::to_string(r), "t",
                              failing_rows.count(static_cast<int>(r)) == 0});
  }
  return suite;
}

inline cofl::SelectionSet sels(std::vector<cofl::FeatureSelection> v) {
  return cofl::SelectionSet(std::move(v));
}

}  // namespace testsupport
