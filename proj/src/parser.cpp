#include "cofl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <sstream>

namespace cofl {

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << file << ':' << line << ':' << col << ": "
     << (severity == Severity::Error ? "error" : "warning") << ": " << message;
  return os.str();
}

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, DefineKw, DefineEnd, End };
  Kind kind = Kind::End;
  std::string text;
  long long number = 0;
  int line = 0;
  int col = 0;
  int pc_id = 0;
};

struct Guard {
  FeatureLiteral lit;
  bool flipped = false;
  int line = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const char* kPuncts[] = {"<=", ">=", "==", "!=", "&&", "||", "++", "--",
                         "(",  ")",  "{",  "}",  "[",  "]",  ";",  ",",
                         "=",  "<",  ">",  "+",  "-",  "*",  "/",  "%",
                         "!",  "?",  ":"};

class Lexer {
 public:
  Lexer(const SourceUnit& unit, std::vector<Diagnostic>& diags)
      : unit_(unit), diags_(diags) {}

  struct Output {
    std::vector<Token> tokens;
    std::vector<std::vector<FeatureLiteral>> pc_pool;
    std::set<FeatureLiteral> declared;
  };

  Output run() {
    out_.pc_pool.push_back({});  // pc_id 0 = core
    std::istringstream is(unit_.text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      process_line(line, lineno);
    }
    for (const Guard& g : stack_)
      error(g.line, 1, "unterminated conditional for option " + g.lit.option);
    Token end;
    end.kind = Token::Kind::End;
    end.line = lineno + 1;
    end.pc_id = 0;
    out_.tokens.push_back(end);
    return std::move(out_);
  }

 private:
  void error(int line, int col, const std::string& msg) {
    diags_.push_back({Severity::Error, unit_.path, line, col, msg});
  }

  std::string strip_comments(const std::string& raw, int lineno) {
    std::string out;
    std::size_t i = 0;
    while (i < raw.size()) {
      if (in_block_comment_) {
        auto end = raw.find("*/", i);
        if (end == std::string::npos) return out;
        in_block_comment_ = false;
        i = end + 2;
        continue;
      }
      if (raw.compare(i, 2, "//") == 0) return out;
      if (raw.compare(i, 2, "/*") == 0) {
        in_block_comment_ = true;
        i += 2;
        continue;
      }
      out.push_back(raw[i]);
      ++i;
    }
    (void)lineno;
    return out;
  }

  int current_pc_id() {
    std::vector<FeatureLiteral> pc;
    for (const Guard& g : stack_) pc.push_back(g.lit);
    for (std::size_t i = 0; i < out_.pc_pool.size(); ++i)
      if (out_.pc_pool[i] == pc) return static_cast<int>(i);
    out_.pc_pool.push_back(pc);
    return static_cast<int>(out_.pc_pool.size() - 1);
  }

  void process_line(const std::string& raw, int lineno) {
    std::string line = strip_comments(raw, lineno);
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) return;
    if (line[first] == '#') {
      handle_directive(line, lineno, static_cast<int>(first));
      return;
    }
    tokenize(line, lineno);
  }

  void handle_directive(const std::string& line, int lineno, int col) {
    std::istringstream is(line.substr(col + 1));
    std::string word;
    is >> word;
    if (word == "ifdef" || word == "ifndef") {
      std::string opt;
      is >> opt;
      if (opt.empty() || !ident_start(opt[0])) {
        error(lineno, col, "#" + word + " expects an option name");
        return;
      }
      FeatureLiteral lit{opt, word == "ifdef"};
      stack_.push_back({lit, false, lineno});
      out_.declared.insert(lit);
    } else if (word == "else") {
      if (stack_.empty() || stack_.back().flipped) {
        error(lineno, col, "#else without matching #ifdef/#ifndef");
        return;
      }
      stack_.back().lit.value = !stack_.back().lit.value;
      stack_.back().flipped = true;
      out_.declared.insert(stack_.back().lit);
    } else if (word == "endif") {
      if (stack_.empty()) {
        error(lineno, col, "#endif without matching #ifdef/#ifndef");
        return;
      }
      stack_.pop_back();
    } else if (word == "define") {
      std::string name;
      is >> name;
      if (name.empty() || !ident_start(name[0])) {
        error(lineno, col, "#define expects a macro name");
        return;
      }
      int pc = current_pc_id();
      Token kw;
      kw.kind = Token::Kind::DefineKw;
      kw.line = lineno;
      kw.col = col + 1;
      kw.pc_id = pc;
      out_.tokens.push_back(kw);
      Token nm;
      nm.kind = Token::Kind::Ident;
      nm.text = name;
      nm.line = lineno;
      nm.col = col + 1;
      nm.pc_id = pc;
      out_.tokens.push_back(nm);
      std::string rest;
      std::getline(is, rest);
      tokenize(rest, lineno);
      Token endm;
      endm.kind = Token::Kind::DefineEnd;
      endm.line = lineno;
      endm.pc_id = pc;
      out_.tokens.push_back(endm);
    } else {
      error(lineno, col, "unknown directive #" + word);
    }
  }

  void tokenize(const std::string& line, int lineno) {
    int pc = current_pc_id();
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
      Token t;
      t.line = lineno;
      t.col = static_cast<int>(i) + 1;
      t.pc_id = pc;
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < line.size() && ident_char(line[j])) ++j;
        t.kind = Token::Kind::Ident;
        t.text = line.substr(i, j - i);
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        t.kind = Token::Kind::Number;
        t.text = line.substr(i, j - i);
        t.number = std::stoll(t.text);
        i = j;
      } else {
        bool matched = false;
        for (const char* p : kPuncts) {
          std::size_t n = std::strlen(p);
          if (line.compare(i, n, p) == 0) {
            t.kind = Token::Kind::Punct;
            t.text = p;
            i += n;
            matched = true;
            break;
          }
        }
        if (!matched) {
          error(lineno, t.col, std::string("unexpected character '") + c + "'");
          ++i;
          continue;
        }
      }
      out_.tokens.push_back(std::move(t));
    }
  }

  const SourceUnit& unit_;
  std::vector<Diagnostic>& diags_;
  std::vector<Guard> stack_;
  bool in_block_comment_ = false;
  Output out_;
};

class Parser {
 public:
  Parser(const SourceUnit& unit, Lexer::Output lexed, std::vector<Diagnostic>& diags)
      : unit_(unit), lexed_(std::move(lexed)), diags_(diags) {}

  std::unique_ptr<ast::Program> run() {
    auto program = std::make_unique<ast::Program>();
    program->file = unit_.path;
    program->declared_features = lexed_.declared;
    while (!at_end()) {
      if (peek().kind == Token::Kind::DefineKw) {
        auto s = parse_define();
        if (s) program->items.push_back({std::move(s), nullptr});
        continue;
      }
      if (is_kw("int") || is_kw("void")) {
        // function definition when "type ident (" follows, otherwise a decl
        if (tokens_left() >= 3 && lexed_.tokens[pos_ + 1].kind == Token::Kind::Ident &&
            lexed_.tokens[pos_ + 2].text == "(") {
          auto f = parse_function();
          if (f) program->items.push_back({nullptr, std::move(f)});
        } else {
          auto s = parse_decl(/*scope_fn=*/nullptr);
          if (s) program->items.push_back({std::move(s), nullptr});
        }
        continue;
      }
      error(peek(), "expected a declaration, function definition, or #define at top level");
      synchronize();
    }
    return program;
  }

 private:
  bool at_end() const { return lexed_.tokens[pos_].kind == Token::Kind::End; }
  std::size_t tokens_left() const { return lexed_.tokens.size() - pos_; }
  const Token& peek(int off = 0) const {
    std::size_t i = pos_ + off;
    if (i >= lexed_.tokens.size()) i = lexed_.tokens.size() - 1;
    return lexed_.tokens[i];
  }
  const Token& advance() { return lexed_.tokens[pos_++]; }
  bool is_kw(const char* kw) const {
    return peek().kind == Token::Kind::Ident && peek().text == kw;
  }
  bool is_punct(const char* p) const {
    return peek().kind == Token::Kind::Punct && peek().text == p;
  }
  bool match_punct(const char* p) {
    if (is_punct(p)) { ++pos_; return true; }
    return false;
  }
  const Token* expect_punct(const char* p) {
    if (is_punct(p)) return &advance();
    error(peek(), std::string("expected '") + p + "'");
    return nullptr;
  }
  void error(const Token& t, const std::string& msg) {
    diags_.push_back({Severity::Error, unit_.path, t.line, t.col, msg});
  }
  void synchronize() {
    while (!at_end()) {
      const Token& t = advance();
      if (t.kind == Token::Kind::Punct && (t.text == ";" || t.text == "}")) return;
      if (t.kind == Token::Kind::DefineEnd) return;
    }
  }
  std::vector<FeatureLiteral> pc_at(int pc_id) const { return lexed_.pc_pool[pc_id]; }

  ast::StmtPtr parse_define() {
    const Token& kw = advance();  // DefineKw
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::Define;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = s->line_end = kw.line;
    s->name = advance().text;  // macro name (lexer guarantees an ident)
    if (peek().kind != Token::Kind::DefineEnd) s->value = parse_expr();
    if (peek().kind == Token::Kind::DefineEnd)
      advance();
    else {
      error(peek(), "trailing tokens in #define");
      synchronize();
    }
    return s;
  }

  std::unique_ptr<ast::Function> parse_function() {
    auto f = std::make_unique<ast::Function>();
    const Token& type = advance();
    f->returns_value = type.text == "int";
    f->pc = pc_at(type.pc_id);
    f->line_begin = type.line;
    f->name = advance().text;
    expect_punct("(");
    while (!is_punct(")") && !at_end()) {
      if (!is_kw("int") && !is_kw("void")) {
        error(peek(), "expected parameter type");
        break;
      }
      advance();
      if (peek().kind == Token::Kind::Ident) f->params.push_back(advance().text);
      if (!match_punct(",")) break;
    }
    expect_punct(")");
    const Token* open = expect_punct("{");
    if (!open) return f;
    int open_pc = lexed_.tokens[pos_ - 1].pc_id;
    while (!is_punct("}") && !at_end()) {
      auto s = parse_stmt();
      if (s) f->body.push_back(std::move(s));
    }
    if (is_punct("}")) {
      const Token& close = advance();
      f->line_end = close.line;
      if (close.pc_id != open_pc)
        error(close, "conditional block cuts across the body of function " + f->name);
    } else {
      error(peek(), "unterminated body of function " + f->name);
    }
    return f;
  }

  ast::StmtPtr parse_decl(const void* scope_fn) {
    (void)scope_fn;
    const Token& type = advance();  // int | void
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::Decl;
    s->pc = pc_at(type.pc_id);
    s->line_begin = type.line;
    if (peek().kind != Token::Kind::Ident) {
      error(peek(), "expected a name in declaration");
      synchronize();
      return nullptr;
    }
    s->name = advance().text;
    if (match_punct("[")) {
      s->is_array = true;
      s->size = parse_expr();
      expect_punct("]");
    }
    if (match_punct("=")) s->init = parse_expr();
    s->line_end = peek().line;
    expect_punct(";");
    return s;
  }

  std::vector<ast::StmtPtr> parse_body_or_single() {
    std::vector<ast::StmtPtr> body;
    if (match_punct("{")) {
      int open_pc = lexed_.tokens[pos_ - 1].pc_id;
      while (!is_punct("}") && !at_end()) {
        auto s = parse_stmt();
        if (s) body.push_back(std::move(s));
      }
      if (is_punct("}")) {
        const Token& close = advance();
        if (close.pc_id != open_pc) error(close, "conditional block cuts across a brace block");
      } else {
        error(peek(), "unterminated block");
      }
    } else {
      auto s = parse_stmt();
      if (s) body.push_back(std::move(s));
    }
    return body;
  }

  ast::StmtPtr parse_stmt() {
    const Token& t = peek();
    if (t.kind == Token::Kind::DefineKw) return parse_define();
    if (is_punct(";")) {
      advance();
      auto s = std::make_unique<ast::Stmt>();
      s->kind = ast::Stmt::Kind::Empty;
      s->pc = pc_at(t.pc_id);
      s->line_begin = s->line_end = t.line;
      return s;
    }
    if (is_punct("{")) {
      auto s = std::make_unique<ast::Stmt>();
      s->kind = ast::Stmt::Kind::Block;
      s->pc = pc_at(t.pc_id);
      s->line_begin = s->line_end = t.line;
      s->body = parse_body_or_single();
      return s;
    }
    if (is_kw("int") || is_kw("void")) return parse_decl(nullptr);
    if (is_kw("return")) {
      auto s = std::make_unique<ast::Stmt>();
      s->kind = ast::Stmt::Kind::Return;
      s->pc = pc_at(t.pc_id);
      s->line_begin = t.line;
      advance();
      if (!is_punct(";")) s->value = parse_expr();
      s->line_end = peek().line;
      expect_punct(";");
      return s;
    }
    if (is_kw("if")) return parse_if();
    if (is_kw("while")) return parse_while();
    if (is_kw("do")) return parse_do_while();
    if (is_kw("for")) return parse_for();
    if (is_kw("switch")) return parse_switch();
    if (t.kind == Token::Kind::Ident) return parse_assign_or_call();
    error(t, "expected a statement");
    synchronize();
    return nullptr;
  }

  ast::StmtPtr parse_if() {
    const Token& kw = advance();
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::If;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = kw.line;
    expect_punct("(");
    s->cond = parse_expr();
    s->line_end = peek().line;
    expect_punct(")");
    s->body = parse_body_or_single();
    if (is_kw("else")) {
      advance();
      s->else_body = parse_body_or_single();
    }
    return s;
  }

  ast::StmtPtr parse_while() {
    const Token& kw = advance();
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::While;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = kw.line;
    expect_punct("(");
    s->cond = parse_expr();
    s->line_end = peek().line;
    expect_punct(")");
    s->body = parse_body_or_single();
    return s;
  }

  ast::StmtPtr parse_do_while() {
    const Token& kw = advance();
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::DoWhile;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = kw.line;
    s->body = parse_body_or_single();
    if (!is_kw("while")) {
      error(peek(), "expected 'while' after do-body");
      synchronize();
      return s;
    }
    advance();
    expect_punct("(");
    s->cond = parse_expr();
    s->line_end = peek().line;
    expect_punct(")");
    expect_punct(";");
    return s;
  }

  ast::StmtPtr parse_for() {
    const Token& kw = advance();
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::For;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = kw.line;
    expect_punct("(");
    if (is_kw("int")) {
      advance();
      s->for_declares = true;
    }
    if (peek().kind != Token::Kind::Ident) {
      error(peek(), "expected loop variable in for-header");
      synchronize();
      return nullptr;
    }
    s->name = advance().text;
    expect_punct("=");
    s->init = parse_expr();
    expect_punct(";");
    s->cond = parse_expr();
    expect_punct(";");
    if (peek().kind != Token::Kind::Ident) {
      error(peek(), "expected loop step in for-header");
      synchronize();
      return nullptr;
    }
    std::string step_var = advance().text;
    if (step_var != s->name)
      error(peek(), "for-step must update the loop variable " + s->name);
    if (is_punct("++") || is_punct("--")) {
      s->step_op = advance().text;
    } else if (match_punct("=")) {
      s->step_op = "=";
      s->step = parse_expr();
    } else {
      error(peek(), "expected '++', '--' or '=' in for-step");
    }
    s->line_end = peek().line;
    expect_punct(")");
    s->body = parse_body_or_single();
    return s;
  }

  ast::StmtPtr parse_switch() {
    const Token& kw = advance();
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::Switch;
    s->pc = pc_at(kw.pc_id);
    s->line_begin = kw.line;
    expect_punct("(");
    s->cond = parse_expr();
    s->line_end = peek().line;
    expect_punct(")");
    expect_punct("{");
    while (!is_punct("}") && !at_end()) {
      ast::Stmt::Case c;
      if (is_kw("case")) {
        advance();
        if (peek().kind == Token::Kind::Number) {
          c.label = advance().number;
        } else if (is_punct("-") && peek(1).kind == Token::Kind::Number) {
          advance();
          c.label = -advance().number;
        } else {
          error(peek(), "expected an integer case label");
        }
      } else if (is_kw("default")) {
        advance();
        c.is_default = true;
      } else {
        error(peek(), "expected 'case' or 'default' in switch");
        synchronize();
        continue;
      }
      expect_punct(":");
      while (!is_kw("case") && !is_kw("default") && !is_punct("}") && !at_end()) {
        auto inner = parse_stmt();
        if (inner) c.body.push_back(std::move(inner));
      }
      s->cases.push_back(std::move(c));
    }
    expect_punct("}");
    return s;
  }

  ast::StmtPtr parse_assign_or_call() {
    const Token& first = peek();
    // Assignment when "ident =" or "ident [ ... ] =" follows; else expression.
    bool assign = false;
    bool indexed = false;
    if (peek(1).text == "=") {
      assign = true;
    } else if (peek(1).text == "[") {
      int depth = 0;
      for (std::size_t i = pos_ + 1; i < lexed_.tokens.size(); ++i) {
        const Token& t = lexed_.tokens[i];
        if (t.kind == Token::Kind::End) break;
        if (t.text == "[") ++depth;
        if (t.text == "]") {
          --depth;
          if (depth == 0) {
            if (i + 1 < lexed_.tokens.size() && lexed_.tokens[i + 1].text == "=")
              { assign = true; indexed = true; }
            break;
          }
        }
      }
    }
    if (assign) {
      auto s = std::make_unique<ast::Stmt>();
      s->kind = ast::Stmt::Kind::Assign;
      s->pc = pc_at(first.pc_id);
      s->line_begin = first.line;
      s->name = advance().text;
      if (indexed) {
        expect_punct("[");
        s->index = parse_expr();
        expect_punct("]");
      }
      expect_punct("=");
      s->value = parse_expr();
      s->line_end = peek().line;
      expect_punct(";");
      return s;
    }
    auto s = std::make_unique<ast::Stmt>();
    s->kind = ast::Stmt::Kind::ExprStmt;
    s->pc = pc_at(first.pc_id);
    s->line_begin = first.line;
    s->value = parse_expr();
    s->line_end = peek().line;
    expect_punct(";");
    return s;
  }

  ast::ExprPtr parse_expr() { return parse_ternary(); }

  ast::ExprPtr parse_ternary() {
    auto c = parse_or();
    if (match_punct("?")) {
      auto e = std::make_unique<ast::Expr>();
      e->kind = ast::Expr::Kind::Ternary;
      e->args.push_back(std::move(c));
      e->args.push_back(parse_expr());
      expect_punct(":");
      e->args.push_back(parse_expr());
      return e;
    }
    return c;
  }

  ast::ExprPtr binary(ast::ExprPtr lhs, const std::string& op, ast::ExprPtr rhs) {
    auto e = std::make_unique<ast::Expr>();
    e->kind = ast::Expr::Kind::Binary;
    e->op = op;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    return e;
  }

  ast::ExprPtr parse_or() {
    auto lhs = parse_and();
    while (is_punct("||")) { advance(); lhs = binary(std::move(lhs), "||", parse_and()); }
    return lhs;
  }
  ast::ExprPtr parse_and() {
    auto lhs = parse_equality();
    while (is_punct("&&")) { advance(); lhs = binary(std::move(lhs), "&&", parse_equality()); }
    return lhs;
  }
  ast::ExprPtr parse_equality() {
    auto lhs = parse_relational();
    while (is_punct("==") || is_punct("!=")) {
      std::string op = advance().text;
      lhs = binary(std::move(lhs), op, parse_relational());
    }
    return lhs;
  }
  ast::ExprPtr parse_relational() {
    auto lhs = parse_additive();
    while (is_punct("<") || is_punct("<=") || is_punct(">") || is_punct(">=")) {
      std::string op = advance().text;
      lhs = binary(std::move(lhs), op, parse_additive());
    }
    return lhs;
  }
  ast::ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (is_punct("+") || is_punct("-")) {
      std::string op = advance().text;
      lhs = binary(std::move(lhs), op, parse_multiplicative());
    }
    return lhs;
  }
  ast::ExprPtr parse_multiplicative() {
    auto lhs = parse_unary();
    while (is_punct("*") || is_punct("/") || is_punct("%")) {
      std::string op = advance().text;
      lhs = binary(std::move(lhs), op, parse_unary());
    }
    return lhs;
  }
  ast::ExprPtr parse_unary() {
    if (is_punct("!") || is_punct("-")) {
      auto e = std::make_unique<ast::Expr>();
      e->kind = ast::Expr::Kind::Unary;
      e->op = advance().text;
      e->args.push_back(parse_unary());
      return e;
    }
    return parse_postfix();
  }
  ast::ExprPtr parse_postfix() {
    if (peek().kind == Token::Kind::Ident) {
      std::string name = advance().text;
      if (match_punct("(")) {
        auto e = std::make_unique<ast::Expr>();
        e->kind = ast::Expr::Kind::Call;
        e->name = name;
        if (!is_punct(")")) {
          e->args.push_back(parse_expr());
          while (match_punct(",")) e->args.push_back(parse_expr());
        }
        expect_punct(")");
        return e;
      }
      if (match_punct("[")) {
        auto e = std::make_unique<ast::Expr>();
        e->kind = ast::Expr::Kind::Index;
        e->name = name;
        e->args.push_back(parse_expr());
        expect_punct("]");
        return e;
      }
      auto e = std::make_unique<ast::Expr>();
      e->kind = ast::Expr::Kind::Ident;
      e->name = name;
      return e;
    }
    if (peek().kind == Token::Kind::Number) {
      auto e = std::make_unique<ast::Expr>();
      e->kind = ast::Expr::Kind::IntLit;
      e->value = advance().number;
      return e;
    }
    if (match_punct("(")) {
      auto e = parse_expr();
      expect_punct(")");
      return e;
    }
    error(peek(), "expected an expression");
    advance();
    auto e = std::make_unique<ast::Expr>();
    e->kind = ast::Expr::Kind::IntLit;
    return e;
  }

  const SourceUnit& unit_;
  Lexer::Output lexed_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Model extraction
// ---------------------------------------------------------------------------

class ModelBuilder {
 public:
  ModelBuilder(ProgramModel& model, const std::string& file) : model_(model), file_(file) {}

  void collect_signatures(const ast::Program& p) {
    for (const auto& item : p.items)
      if (item.func) function_names_.insert(item.func->name);
  }

  void build(ast::Program& p) {
    for (const FeatureLiteral& lit : p.declared_features) model_.declared_features.insert(lit);
    for (auto& item : p.items) {
      if (item.stmt) {
        emit_leaf(*item.stmt, nullptr, std::nullopt);
      } else if (item.func) {
        emit_function(*item.func);
      }
    }
  }

 private:
  struct Scope {
    std::string fn;
    std::set<std::string> locals;
  };

  Entity resolve(const std::string& name, const Scope* scope) const {
    if (scope && scope->locals.count(name)) return {scope->fn, name, EntityKind::Variable};
    EntityKind kind =
        function_names_.count(name) ? EntityKind::Function : EntityKind::Variable;
    return {kGlobalScope, name, kind};
  }

  void collect_uses(const ast::Expr* e, const Scope* scope, std::set<Entity>& out) const {
    if (!e) return;
    switch (e->kind) {
      case ast::Expr::Kind::Ident:
      case ast::Expr::Kind::Index:
        out.insert(resolve(e->name, scope));
        break;
      case ast::Expr::Kind::Call: {
        Entity callee = resolve(e->name, scope);
        callee.kind = EntityKind::Function;
        out.insert(callee);
        break;
      }
      default:
        break;
    }
    for (const auto& a : e->args) collect_uses(a.get(), scope, out);
  }

  static void collect_locals(const std::vector<ast::StmtPtr>& body, std::set<std::string>& out) {
    for (const auto& s : body) {
      if (!s) continue;
      if (s->kind == ast::Stmt::Kind::Decl) out.insert(s->name);
      if (s->kind == ast::Stmt::Kind::For && s->for_declares) out.insert(s->name);
      collect_locals(s->body, out);
      collect_locals(s->else_body, out);
      for (const auto& c : s->cases) collect_locals(c.body, out);
    }
  }

  StatementId new_statement(const ast::Stmt& s, std::optional<StatementId> parent,
                            const std::string& text) {
    Statement st;
    st.id = static_cast<StatementId>(model_.statements.size());
    st.file = file_;
    st.line_begin = s.line_begin;
    st.line_end = s.line_end ? s.line_end : s.line_begin;
    st.pc = s.pc;
    st.control_parent = parent;
    st.text = text;
    model_.statements.push_back(std::move(st));
    return model_.statements.back().id;
  }

  void add_def(StatementId id, const Entity& e, DefKind k) {
    auto& defs = model_.statements[id].defs;
    for (auto& [ent, kind] : defs)
      if (ent == e && kind == k) return;
    defs.emplace_back(e, k);
  }

  void add_uses(StatementId id, const std::set<Entity>& uses) {
    auto& u = model_.statements[id].uses;
    for (const Entity& e : uses)
      if (std::find(u.begin(), u.end(), e) == u.end()) u.push_back(e);
    std::sort(u.begin(), u.end());
  }

  void add_body_def(StatementId id, const Scope* scope) {
    if (!scope) return;
    add_def(id, Entity{kGlobalScope, scope->fn, EntityKind::Function}, DefKind::Body);
  }

  void check_pc_superset(const ast::Stmt& s, const std::vector<FeatureLiteral>& outer) {
    for (const FeatureLiteral& lit : outer)
      if (std::find(s.pc.begin(), s.pc.end(), lit) == s.pc.end())
        throw InputError(file_ + ":" + std::to_string(s.line_begin) +
                         ": statement escapes the conditional region of its enclosing function");
  }

  void emit_function(ast::Function& f) {
    Scope scope;
    scope.fn = f.name;
    for (const std::string& p : f.params) scope.locals.insert(p);
    collect_locals(f.body, scope.locals);

    ast::Stmt header;
    header.pc = f.pc;
    header.line_begin = f.line_begin;
    header.line_end = f.line_begin;
    std::string text = (f.returns_value ? std::string("int ") : std::string("void ")) + f.name + "(...)";
    f.header_id = new_statement(header, std::nullopt, text);
    add_def(f.header_id, Entity{kGlobalScope, f.name, EntityKind::Function}, DefKind::Body);
    for (const std::string& p : f.params)
      add_def(f.header_id, Entity{f.name, p, EntityKind::Variable}, DefKind::Uninit);

    for (auto& s : f.body) {
      if (!s) continue;
      check_pc_superset(*s, f.pc);
      emit_stmt(*s, &scope, std::nullopt);
    }
  }

  void emit_body(std::vector<ast::StmtPtr>& body, Scope* scope, std::optional<StatementId> parent) {
    for (auto& s : body) {
      if (!s) continue;
      emit_stmt(*s, scope, parent);
    }
  }

  void emit_stmt(ast::Stmt& s, Scope* scope, std::optional<StatementId> parent) {
    switch (s.kind) {
      case ast::Stmt::Kind::Block:
        emit_body(s.body, scope, parent);
        return;
      case ast::Stmt::Kind::Empty:
        return;
      case ast::Stmt::Kind::If:
      case ast::Stmt::Kind::While:
      case ast::Stmt::Kind::DoWhile:
      case ast::Stmt::Kind::Switch: {
        std::set<Entity> uses;
        collect_uses(s.cond.get(), scope, uses);
        const char* kw = s.kind == ast::Stmt::Kind::If       ? "if"
                         : s.kind == ast::Stmt::Kind::While  ? "while"
                         : s.kind == ast::Stmt::Kind::DoWhile ? "do-while"
                                                              : "switch";
        StatementId id = new_statement(s, parent, std::string(kw) + " (" + ast::to_string(*s.cond) + ")");
        s.stmt_id = id;
        add_uses(id, uses);
        add_body_def(id, scope);
        emit_body(s.body, scope, id);
        emit_body(s.else_body, scope, id);
        for (auto& c : s.cases) emit_body(c.body, scope, id);
        return;
      }
      case ast::Stmt::Kind::For: {
        // The whole for-header (init, condition, step) is one statement; the
        // condition governs the body.
        std::set<Entity> uses;
        collect_uses(s.init.get(), scope, uses);
        collect_uses(s.cond.get(), scope, uses);
        collect_uses(s.step.get(), scope, uses);
        Entity var = resolve(s.name, scope);
        if (s.step_op == "++" || s.step_op == "--") uses.insert(var);
        std::string text = "for (" + std::string(s.for_declares ? "int " : "") + s.name + " = " +
                           ast::to_string(*s.init) + "; " + ast::to_string(*s.cond) + "; " +
                           s.name + (s.step_op == "=" ? " = " + ast::to_string(*s.step) : s.step_op) +
                           ")";
        StatementId id = new_statement(s, parent, text);
        s.stmt_id = id;
        add_def(id, var, DefKind::Value);
        add_uses(id, uses);
        add_body_def(id, scope);
        emit_body(s.body, scope, id);
        return;
      }
      default:
        emit_leaf(s, scope, parent);
        return;
    }
  }

  void emit_leaf(ast::Stmt& s, Scope* scope, std::optional<StatementId> parent) {
    std::set<Entity> uses;
    switch (s.kind) {
      case ast::Stmt::Kind::Define: {
        collect_uses(s.value.get(), nullptr, uses);
        StatementId id = new_statement(
            s, parent, "#define " + s.name + (s.value ? " " + ast::to_string(*s.value) : ""));
        s.stmt_id = id;
        add_def(id, Entity{kGlobalScope, s.name, EntityKind::Variable}, DefKind::Value);
        add_uses(id, uses);
        add_body_def(id, scope);
        return;
      }
      case ast::Stmt::Kind::Decl: {
        collect_uses(s.size.get(), scope, uses);
        collect_uses(s.init.get(), scope, uses);
        std::string text = "int " + s.name + (s.is_array ? "[" + ast::to_string(*s.size) + "]" : "") +
                           (s.init ? " = " + ast::to_string(*s.init) : "") + ";";
        StatementId id = new_statement(s, parent, text);
        s.stmt_id = id;
        Entity e = scope ? Entity{scope->fn, s.name, EntityKind::Variable}
                         : Entity{kGlobalScope, s.name, EntityKind::Variable};
        add_def(id, e, s.init ? DefKind::Value : DefKind::Uninit);
        add_uses(id, uses);
        add_body_def(id, scope);
        return;
      }
      case ast::Stmt::Kind::Assign: {
        collect_uses(s.index.get(), scope, uses);
        collect_uses(s.value.get(), scope, uses);
        std::string text = s.name + (s.index ? "[" + ast::to_string(*s.index) + "]" : "") + " = " +
                           ast::to_string(*s.value) + ";";
        StatementId id = new_statement(s, parent, text);
        s.stmt_id = id;
        add_def(id, resolve(s.name, scope), DefKind::Value);
        add_uses(id, uses);
        add_body_def(id, scope);
        return;
      }
      case ast::Stmt::Kind::ExprStmt: {
        collect_uses(s.value.get(), scope, uses);
        StatementId id = new_statement(s, parent, ast::to_string(*s.value) + ";");
        s.stmt_id = id;
        add_uses(id, uses);
        add_body_def(id, scope);
        return;
      }
      case ast::Stmt::Kind::Return: {
        collect_uses(s.value.get(), scope, uses);
        StatementId id = new_statement(
            s, parent, s.value ? "return " + ast::to_string(*s.value) + ";" : "return;");
        s.stmt_id = id;
        add_uses(id, uses);
        add_body_def(id, scope);
        return;
      }
      default:
        return;
    }
  }

  ProgramModel& model_;
  std::string file_;
  std::set<std::string> function_names_;
};

}  // namespace

ParseResult parse(const std::vector<SourceUnit>& units) {
  ParseResult result;
  std::vector<std::unique_ptr<ast::Program>> programs;
  for (const SourceUnit& unit : units) {
    Lexer lexer(unit, result.diagnostics);
    Parser parser(unit, lexer.run(), result.diagnostics);
    programs.push_back(parser.run());
  }
  if (!result.ok()) return result;

  // Function names must be known across units before defs/uses are resolved,
  // so every per-unit builder collects all signatures first.
  for (auto& p : programs) {
    ModelBuilder builder(result.model, p->file);
    for (const auto& q : programs) builder.collect_signatures(*q);
    builder.build(*p);
  }
  result.model.finalize();
  if (!programs.empty()) result.program = std::move(programs.front());
  for (std::size_t i = 1; i < programs.size(); ++i)
    result.programs.push_back(std::move(programs[i]));
  return result;
}

std::vector<std::string> lint_model(const ProgramModel& model) {
  std::vector<std::string> warnings;
  for (const auto& [entity, sites] : model.use_map) {
    (void)sites;
    if (model.defines_of(entity).empty())
      warnings.push_back("entity " + entity.str() + " is used but never defined");
  }
  for (const FeatureLiteral& lit : model.features)
    if (model.phi_of(lit).empty())
      warnings.push_back("feature " + to_string(lit) + " guards no statements");
  return warnings;
}

}  // namespace cofl
