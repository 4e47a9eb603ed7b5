#pragma once

#include <string>
#include <vector>

#include "cofl/dependence_types.hpp"
#include "cofl/model.hpp"
#include "cofl/spc.hpp"

namespace cofl {

std::string model_to_json(const ProgramModel& model);
ProgramModel model_from_json(const std::string& text);

std::string suite_to_json(const ConfigurationSuite& suite);
ConfigurationSuite suite_from_json(const std::string& text);

// Newline-delimited JSON records {config, test, executed: [ids]}.
std::string traces_to_ndjson(const std::vector<ExecutionTrace>& traces);
std::vector<ExecutionTrace> traces_from_ndjson(const std::string& text);

std::string spcs_to_json(const std::vector<SuspiciousPartialConfiguration>& spcs);
std::vector<SuspiciousPartialConfiguration> spcs_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Loads a model from a .cvl source file (parsing it) or a .json model dump.
ProgramModel load_model(const std::string& path);

}  // namespace cofl
