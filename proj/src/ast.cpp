#include "cofl/ast.hpp"

#include <sstream>

namespace cofl::ast {

namespace {

void print_expr(const Expr& e, std::ostream& os) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      os << e.value;
      break;
    case Expr::Kind::Ident:
      os << e.name;
      break;
    case Expr::Kind::Call: {
      os << e.name << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(*e.args[i], os);
      }
      os << ')';
      break;
    }
    case Expr::Kind::Index:
      os << e.name << '[';
      print_expr(*e.args[0], os);
      os << ']';
      break;
    case Expr::Kind::Unary:
      os << e.op << '(';
      print_expr(*e.args[0], os);
      os << ')';
      break;
    case Expr::Kind::Binary:
      os << '(';
      print_expr(*e.args[0], os);
      os << ' ' << e.op << ' ';
      print_expr(*e.args[1], os);
      os << ')';
      break;
    case Expr::Kind::Ternary:
      os << '(';
      print_expr(*e.args[0], os);
      os << " ? ";
      print_expr(*e.args[1], os);
      os << " : ";
      print_expr(*e.args[2], os);
      os << ')';
      break;
  }
}

class Printer {
 public:
  explicit Printer(std::ostream& os) : os_(os) {}

  void program(const Program& p) {
    for (const auto& item : p.items) {
      if (item.stmt) {
        sync_guards(item.stmt->pc);
        stmt(*item.stmt, 0);
      } else if (item.func) {
        sync_guards(item.func->pc);
        function(*item.func);
      }
    }
    sync_guards({});
  }

 private:
  void sync_guards(const std::vector<FeatureLiteral>& want) {
    std::size_t common = 0;
    while (common < open_.size() && common < want.size() && open_[common] == want[common])
      ++common;
    for (std::size_t i = open_.size(); i > common; --i) os_ << "#endif\n";
    open_.resize(common);
    for (std::size_t i = common; i < want.size(); ++i) {
      os_ << (want[i].value ? "#ifdef " : "#ifndef ") << want[i].option << '\n';
      open_.push_back(want[i]);
    }
  }

  void indent(int depth) {
    for (int i = 0; i < depth; ++i) os_ << "  ";
  }

  void function(const Function& f) {
    os_ << (f.returns_value ? "int " : "void ") << f.name << '(';
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) os_ << ", ";
      os_ << "int " << f.params[i];
    }
    os_ << ") {\n";
    for (const auto& s : f.body) {
      if (!s) continue;
      sync_guards(s->pc);
      stmt(*s, 1);
    }
    sync_guards(f.pc);
    os_ << "}\n";
  }

  void body(const std::vector<StmtPtr>& stmts, int depth,
            const std::vector<FeatureLiteral>& outer) {
    os_ << "{\n";
    for (const auto& s : stmts) {
      if (!s) continue;
      sync_guards(s->pc);
      stmt(*s, depth + 1);
    }
    sync_guards(outer);
    indent(depth);
    os_ << "}\n";
  }

  void stmt(const Stmt& s, int depth) {
    indent(depth);
    switch (s.kind) {
      case Stmt::Kind::Define:
        os_ << "#define " << s.name;
        if (s.value) {
          os_ << ' ';
          print_expr(*s.value, os_);
        }
        os_ << '\n';
        break;
      case Stmt::Kind::Decl:
        os_ << "int " << s.name;
        if (s.is_array) {
          os_ << '[';
          print_expr(*s.size, os_);
          os_ << ']';
        }
        if (s.init) {
          os_ << " = ";
          print_expr(*s.init, os_);
        }
        os_ << ";\n";
        break;
      case Stmt::Kind::Assign:
        os_ << s.name;
        if (s.index) {
          os_ << '[';
          print_expr(*s.index, os_);
          os_ << ']';
        }
        os_ << " = ";
        print_expr(*s.value, os_);
        os_ << ";\n";
        break;
      case Stmt::Kind::ExprStmt:
        print_expr(*s.value, os_);
        os_ << ";\n";
        break;
      case Stmt::Kind::Return:
        os_ << "return";
        if (s.value) {
          os_ << ' ';
          print_expr(*s.value, os_);
        }
        os_ << ";\n";
        break;
      case Stmt::Kind::If:
        os_ << "if (";
        print_expr(*s.cond, os_);
        os_ << ") ";
        body(s.body, depth, s.pc);
        if (!s.else_body.empty()) {
          indent(depth);
          os_ << "else ";
          body(s.else_body, depth, s.pc);
        }
        break;
      case Stmt::Kind::While:
        os_ << "while (";
        print_expr(*s.cond, os_);
        os_ << ") ";
        body(s.body, depth, s.pc);
        break;
      case Stmt::Kind::DoWhile:
        os_ << "do ";
        body(s.body, depth, s.pc);
        indent(depth);
        os_ << "while (";
        print_expr(*s.cond, os_);
        os_ << ");\n";
        break;
      case Stmt::Kind::For:
        os_ << "for (" << (s.for_declares ? "int " : "") << s.name << " = ";
        print_expr(*s.init, os_);
        os_ << "; ";
        print_expr(*s.cond, os_);
        os_ << "; " << s.name;
        if (s.step_op == "=") {
          os_ << " = ";
          print_expr(*s.step, os_);
        } else {
          os_ << s.step_op;
        }
        os_ << ") ";
        body(s.body, depth, s.pc);
        break;
      case Stmt::Kind::Switch:
        os_ << "switch (";
        print_expr(*s.cond, os_);
        os_ << ") {\n";
        for (const auto& c : s.cases) {
          indent(depth);
          if (c.is_default)
            os_ << "default:\n";
          else
            os_ << "case " << c.label << ":\n";
          for (const auto& inner : c.body) {
            if (!inner) continue;
            sync_guards(inner->pc);
            stmt(*inner, depth + 1);
          }
          sync_guards(s.pc);
        }
        indent(depth);
        os_ << "}\n";
        break;
      case Stmt::Kind::Block:
        body(s.body, depth, s.pc);
        break;
      case Stmt::Kind::Empty:
        os_ << ";\n";
        break;
    }
  }

  std::ostream& os_;
  std::vector<FeatureLiteral> open_;
};

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print_expr(e, os);
  return os.str();
}

std::string pretty_print(const Program& program) {
  std::ostringstream os;
  Printer printer(os);
  printer.program(program);
  return os.str();
}

}  // namespace cofl::ast
