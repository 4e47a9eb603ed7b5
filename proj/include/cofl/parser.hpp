#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cofl/ast.hpp"
#include "cofl/model.hpp"

namespace cofl {

struct SourceUnit {
  std::string path;
  std::string text;  // UTF-8; line numbers are 1-based
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string file;
  int line = 0;
  int col = 0;
  std::string message;

  std::string str() const;
};

struct ParseResult {
  std::vector<Diagnostic> diagnostics;
  std::unique_ptr<ast::Program> program;  // one per input unit, in order
  ProgramModel model;                     // empty unless ok()
  std::vector<std::unique_ptr<ast::Program>> programs;

  bool ok() const {
    for (const Diagnostic& d : diagnostics)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

// Parses CVL source units into one ProgramModel. Statement ids are assigned
// in source order across units (units processed in the given order).
ParseResult parse(const std::vector<SourceUnit>& units);

// Warnings: entities used but never defined; features guarding no statements.
std::vector<std::string> lint_model(const ProgramModel& model);

}  // namespace cofl
