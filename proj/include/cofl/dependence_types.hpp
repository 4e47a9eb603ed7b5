#pragma once

#include <set>
#include <string>

#include "cofl/model.hpp"

namespace cofl {

// Statements executed by one test in one configuration. Repeated coverage of
// a statement within a test counts once, so the payload is a set.
struct ExecutionTrace {
  std::string config;
  std::string test;
  std::set<StatementId> executed;
};

}  // namespace cofl
