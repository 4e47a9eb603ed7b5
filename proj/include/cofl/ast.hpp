#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cofl/model.hpp"

namespace cofl::ast {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, Ident, Call, Index, Unary, Binary, Ternary };
  Kind kind = Kind::IntLit;
  long long value = 0;      // IntLit
  std::string name;         // Ident, Call (callee), Index (array)
  std::string op;           // Unary, Binary
  std::vector<ExprPtr> args;  // Call args; Index [0]=index; Unary [0];
                              // Binary [0],[1]; Ternary [0]?[1]:[2]
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind {
    Define,      // #define name expr
    Decl,        // int x; / int x = e; / int x[e];
    Assign,      // x = e; / x[i] = e;
    ExprStmt,    // e; (typically a call)
    Return,      // return e?;
    If,          // cond, then_body, else_body
    While,       // cond, body
    DoWhile,     // body, cond
    For,         // header folds init/cond/step; body
    Switch,      // cond, cases
    Block,       // body
    Empty,       // ;
  };

  Kind kind = Kind::Empty;
  std::vector<FeatureLiteral> pc;  // lexical guard stack at this statement
  int line_begin = 0;
  int line_end = 0;
  StatementId stmt_id = -1;  // model id of this statement (headers for compounds)

  std::string name;          // Define/Decl/Assign target; For loop variable
  bool is_array = false;     // Decl with [size]
  bool for_declares = false; // For header declares its loop variable
  ExprPtr size;              // Decl array size
  ExprPtr init;              // Decl initializer; For init value
  ExprPtr index;             // Assign to array element
  ExprPtr value;             // Assign/Define/Return/ExprStmt expression
  ExprPtr cond;              // If/While/DoWhile/For/Switch condition
  ExprPtr step;              // For step value (assignment to loop var)
  std::string step_op;       // "++", "--", "=" (step as plain assignment)

  std::vector<StmtPtr> body;
  std::vector<StmtPtr> else_body;  // If
  struct Case {
    bool is_default = false;
    long long label = 0;
    std::vector<StmtPtr> body;
  };
  std::vector<Case> cases;  // Switch
};

struct Function {
  std::string name;
  bool returns_value = false;  // int vs void
  std::vector<std::string> params;
  std::vector<FeatureLiteral> pc;
  int line_begin = 0;
  int line_end = 0;
  StatementId header_id = -1;
  std::vector<StmtPtr> body;
};

// A top-level item is either a statement (Define/Decl) or a function.
struct TopLevel {
  StmtPtr stmt;                    // set when item is a statement
  std::unique_ptr<Function> func;  // set when item is a function
};

struct Program {
  std::string file;
  std::vector<TopLevel> items;
  std::set<FeatureLiteral> declared_features;  // guards seen, even empty blocks
};

std::string to_string(const Expr& e);

// Canonical source rendering. Reparsing yields an isomorphic program
// (statement ids and line spans may differ).
std::string pretty_print(const Program& program);

}  // namespace cofl::ast
