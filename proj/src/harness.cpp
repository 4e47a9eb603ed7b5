#include "cofl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "cofl/dependence.hpp"
#include "cofl/interactions.hpp"
#include "cofl/parallel.hpp"
#include "json.hpp"

namespace cofl {

ParsedProgram parse_program(const SourceUnit& unit) {
  ParseResult result = parse({unit});
  if (!result.ok()) {
    std::string msg = "parse failed:";
    for (const Diagnostic& d : result.diagnostics)
      if (d.severity == Severity::Error) msg += "\n  " + d.str();
    throw InputError(msg);
  }
  ParsedProgram out;
  out.program = std::move(result.program);
  out.model = std::move(result.model);
  return out;
}

// ---------------------------------------------------------------------------
// CVL interpreter
// ---------------------------------------------------------------------------

namespace {

struct Value {
  bool is_array = false;
  long long scalar = 0;
  std::vector<long long> array;
};

struct Frame {
  std::map<std::string, Value> locals;
};

class Interpreter {
 public:
  Interpreter(const ParsedProgram& program, const Configuration& config, std::uint64_t fuel)
      : program_(program), config_(config), fuel_(fuel) {}

  RunOutcome run(const std::string& entry, long long input) {
    startup();
    if (!outcome_.fault) {
      const ast::Function* f = enabled_function(entry);
      if (f) outcome_.result = call(*f, {input});
    }
    return std::move(outcome_);
  }

 private:
  bool enabled(const std::vector<FeatureLiteral>& pc) const {
    for (const FeatureLiteral& lit : pc)
      if (!config_.satisfies(lit)) return false;
    return true;
  }

  const ast::Function* enabled_function(const std::string& name) const {
    for (const auto& item : program_.program->items)
      if (item.func && item.func->name == name && enabled(item.func->pc)) return item.func.get();
    return nullptr;
  }

  bool spend_fuel() {
    if (outcome_.fault) return false;
    if (fuel_ == 0) {
      outcome_.fault = true;
      return false;
    }
    --fuel_;
    return true;
  }

  void trace(StatementId id) {
    if (id >= 0) outcome_.trace.insert(id);
  }

  void startup() {
    for (const auto& item : program_.program->items) {
      if (!item.stmt) continue;
      const ast::Stmt& s = *item.stmt;
      if (!enabled(s.pc) || !spend_fuel()) continue;
      if (s.kind == ast::Stmt::Kind::Define) {
        globals_[s.name] = Value{false, s.value ? eval(*s.value, nullptr) : 0, {}};
        trace(s.stmt_id);
      } else if (s.kind == ast::Stmt::Kind::Decl) {
        Value v;
        if (s.is_array) {
          long long n = s.size ? eval(*s.size, nullptr) : 0;
          if (n < 0) n = 0;
          if (n > 4096) n = 4096;
          v.is_array = true;
          v.array.assign(static_cast<std::size_t>(n), 0);
        } else if (s.init) {
          v.scalar = eval(*s.init, nullptr);
        }
        globals_[s.name] = std::move(v);
        trace(s.stmt_id);
      }
    }
  }

  long long call(const ast::Function& f, const std::vector<long long>& args) {
    if (outcome_.fault) return 0;
    Frame frame;
    for (std::size_t i = 0; i < f.params.size(); ++i)
      frame.locals[f.params[i]] = Value{false, i < args.size() ? args[i] : 0, {}};
    long long ret = 0;
    exec_body(f.body, frame, ret);
    return ret;
  }

  // Returns true when a `return` unwound the body.
  bool exec_body(const std::vector<ast::StmtPtr>& body, Frame& frame, long long& ret) {
    for (const auto& s : body) {
      if (!s) continue;
      if (exec(*s, frame, ret)) return true;
      if (outcome_.fault) return false;
    }
    return false;
  }

  bool exec(const ast::Stmt& s, Frame& frame, long long& ret) {
    if (!enabled(s.pc)) return false;
    if (!spend_fuel()) return false;
    switch (s.kind) {
      case ast::Stmt::Kind::Define:
        globals_[s.name] = Value{false, s.value ? eval(*s.value, &frame) : 0, {}};
        trace(s.stmt_id);
        return false;
      case ast::Stmt::Kind::Decl: {
        Value v;
        if (s.is_array) {
          long long n = s.size ? eval(*s.size, &frame) : 0;
          if (n < 0) n = 0;
          if (n > 4096) n = 4096;
          v.is_array = true;
          v.array.assign(static_cast<std::size_t>(n), 0);
        } else if (s.init) {
          v.scalar = eval(*s.init, &frame);
          trace(s.stmt_id);  // initialized declarations compute a value
        }
        frame.locals[s.name] = std::move(v);
        return false;
      }
      case ast::Stmt::Kind::Assign: {
        long long value = eval(*s.value, &frame);
        if (s.index) {
          long long i = eval(*s.index, &frame);
          store_indexed(s.name, i, value, frame);
        } else {
          store(s.name, value, frame);
        }
        trace(s.stmt_id);
        return false;
      }
      case ast::Stmt::Kind::ExprStmt:
        eval(*s.value, &frame);
        trace(s.stmt_id);
        return false;
      case ast::Stmt::Kind::Return:
        ret = s.value ? eval(*s.value, &frame) : 0;
        trace(s.stmt_id);
        return true;
      case ast::Stmt::Kind::If: {
        trace(s.stmt_id);
        if (eval(*s.cond, &frame) != 0) return exec_body(s.body, frame, ret);
        return exec_body(s.else_body, frame, ret);
      }
      case ast::Stmt::Kind::While: {
        while (true) {
          trace(s.stmt_id);
          if (!spend_fuel()) return false;
          if (eval(*s.cond, &frame) == 0) break;
          if (exec_body(s.body, frame, ret)) return true;
          if (outcome_.fault) return false;
        }
        return false;
      }
      case ast::Stmt::Kind::DoWhile: {
        while (true) {
          if (exec_body(s.body, frame, ret)) return true;
          if (outcome_.fault) return false;
          trace(s.stmt_id);
          if (!spend_fuel()) return false;
          if (eval(*s.cond, &frame) == 0) break;
        }
        return false;
      }
      case ast::Stmt::Kind::For: {
        trace(s.stmt_id);
        store(s.name, eval(*s.init, &frame), frame, s.for_declares);
        while (true) {
          if (!spend_fuel()) return false;
          if (eval(*s.cond, &frame) == 0) break;
          if (exec_body(s.body, frame, ret)) return true;
          if (outcome_.fault) return false;
          long long cur = load(s.name, frame);
          if (s.step_op == "++")
            store(s.name, cur + 1, frame);
          else if (s.step_op == "--")
            store(s.name, cur - 1, frame);
          else
            store(s.name, eval(*s.step, &frame), frame);
        }
        return false;
      }
      case ast::Stmt::Kind::Switch: {
        trace(s.stmt_id);
        long long v = eval(*s.cond, &frame);
        const ast::Stmt::Case* chosen = nullptr;
        const ast::Stmt::Case* fallback = nullptr;
        for (const auto& c : s.cases) {
          if (c.is_default) fallback = &c;
          else if (c.label == v && !chosen) chosen = &c;
        }
        if (!chosen) chosen = fallback;
        if (chosen) return exec_body(chosen->body, frame, ret);
        return false;
      }
      case ast::Stmt::Kind::Block:
        return exec_body(s.body, frame, ret);
      case ast::Stmt::Kind::Empty:
        return false;
    }
    return false;
  }

  long long load(const std::string& name, Frame& frame) {
    auto lit = frame.locals.find(name);
    if (lit != frame.locals.end()) return lit->second.is_array ? 0 : lit->second.scalar;
    auto git = globals_.find(name);
    if (git != globals_.end()) return git->second.is_array ? 0 : git->second.scalar;
    return 0;  // no enabled definition
  }

  void store(const std::string& name, long long v, Frame& frame, bool declare_local = false) {
    if (declare_local) {
      frame.locals[name] = Value{false, v, {}};
      return;
    }
    auto lit = frame.locals.find(name);
    if (lit != frame.locals.end()) {
      lit->second = Value{false, v, {}};
      return;
    }
    auto git = globals_.find(name);
    if (git != globals_.end() && !git->second.is_array) {
      git->second.scalar = v;
      return;
    }
    if (git == globals_.end()) globals_[name] = Value{false, v, {}};
  }

  Value* find_array(const std::string& name, Frame& frame) {
    auto lit = frame.locals.find(name);
    if (lit != frame.locals.end() && lit->second.is_array) return &lit->second;
    auto git = globals_.find(name);
    if (git != globals_.end() && git->second.is_array) return &git->second;
    return nullptr;
  }

  long long load_indexed(const std::string& name, long long i, Frame& frame) {
    Value* arr = find_array(name, frame);
    if (!arr) return 0;  // array absent in this variant
    if (i < 0 || i >= static_cast<long long>(arr->array.size())) {
      outcome_.fault = true;  // out-of-bounds access
      return 0;
    }
    return arr->array[static_cast<std::size_t>(i)];
  }

  void store_indexed(const std::string& name, long long i, long long v, Frame& frame) {
    Value* arr = find_array(name, frame);
    if (!arr) return;
    if (i < 0 || i >= static_cast<long long>(arr->array.size())) {
      outcome_.fault = true;
      return;
    }
    arr->array[static_cast<std::size_t>(i)] = v;
  }

  long long eval(const ast::Expr& e, Frame* frame) {
    if (outcome_.fault) return 0;
    static Frame dummy;
    Frame& fr = frame ? *frame : dummy;
    switch (e.kind) {
      case ast::Expr::Kind::IntLit:
        return e.value;
      case ast::Expr::Kind::Ident:
        return load(e.name, fr);
      case ast::Expr::Kind::Index:
        return load_indexed(e.name, eval(*e.args[0], frame), fr);
      case ast::Expr::Kind::Call: {
        std::vector<long long> args;
        for (const auto& a : e.args) args.push_back(eval(*a, frame));
        const ast::Function* f = enabled_function(e.name);
        if (!f) return 0;  // callee absent in this variant
        return call(*f, args);
      }
      case ast::Expr::Kind::Unary: {
        long long v = eval(*e.args[0], frame);
        return e.op == "!" ? (v == 0 ? 1 : 0) : -v;
      }
      case ast::Expr::Kind::Binary: {
        long long a = eval(*e.args[0], frame);
        if (e.op == "&&") return (a != 0 && eval(*e.args[1], frame) != 0) ? 1 : 0;
        if (e.op == "||") return (a != 0 || eval(*e.args[1], frame) != 0) ? 1 : 0;
        long long b = eval(*e.args[1], frame);
        if (e.op == "+") return a + b;
        if (e.op == "-") return a - b;
        if (e.op == "*") return a * b;
        if (e.op == "/") return b == 0 ? 0 : a / b;
        if (e.op == "%") return b == 0 ? 0 : a % b;
        if (e.op == "<") return a < b;
        if (e.op == "<=") return a <= b;
        if (e.op == ">") return a > b;
        if (e.op == ">=") return a >= b;
        if (e.op == "==") return a == b;
        if (e.op == "!=") return a != b;
        return 0;
      }
      case ast::Expr::Kind::Ternary:
        return eval(*e.args[0], frame) != 0 ? eval(*e.args[1], frame) : eval(*e.args[2], frame);
    }
    return 0;
  }

  const ParsedProgram& program_;
  const Configuration& config_;
  std::uint64_t fuel_;
  std::map<std::string, Value> globals_;
  RunOutcome outcome_;
};

}  // namespace

RunOutcome interpret(const ParsedProgram& program, const Configuration& c,
                     const std::string& entry, long long input, std::uint64_t fuel) {
  Interpreter interp(program, c, fuel);
  return interp.run(entry, input);
}

// ---------------------------------------------------------------------------
// Program generation
// ---------------------------------------------------------------------------

const char* to_string(MutationKind k) {
  switch (k) {
    case MutationKind::OffByOneBound: return "off-by-one-bound";
    case MutationKind::WrongInitializer: return "wrong-initializer";
    case MutationKind::InvertedGuard: return "inverted-guard";
    case MutationKind::WrongAssignTarget: return "wrong-assign-target";
  }
  return "?";
}

MutationKind mutation_kind_from_string(const std::string& s) {
  if (s == "off-by-one-bound") return MutationKind::OffByOneBound;
  if (s == "wrong-initializer") return MutationKind::WrongInitializer;
  if (s == "inverted-guard") return MutationKind::InvertedGuard;
  if (s == "wrong-assign-target") return MutationKind::WrongAssignTarget;
  throw InputError("unknown mutation kind '" + s + "'");
}

namespace {

std::string option_name(int i) { return "OPT_" + std::string(1, static_cast<char>('A' + i)); }
std::string tune_name(int i) { return "TUNE_" + std::string(1, static_cast<char>('A' + i)); }

}  // namespace

SourceUnit generate_program(std::uint64_t seed, int options, int functions) {
  if (options < 2 || options > 16)
    throw InputError("generate_program supports 2..16 options");
  if (functions < 1 || functions > 40)
    throw InputError("generate_program supports 1..40 functions");
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {
    return static_cast<int>(lo + rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  std::ostringstream os;
  os << "#define BASE " << pick(2, 9) << "\n";
  os << "int state;\n";
  os << "int mix;\n";
  os << "int buf[" << pick(16, 24) << "];\n";
  for (int i = 0; i < options; ++i) {
    os << "#ifdef " << option_name(i) << "\n";
    os << "#define " << tune_name(i) << " " << pick(1, 6) << "\n";
    os << "#endif\n";
  }

  // Interaction sites: a statement guarded by one option whose effect is
  // scaled by the TUNE macros of other options.
  for (int f = 0; f < functions; ++f) {
    os << "void f" << f << "(int x) {\n";
    os << "  state = state + x * " << pick(1, 4) << " + BASE;\n";
    os << "  buf[x % 8] = state % " << pick(5, 11) << ";\n";
    int sites = pick(2, 3);
    for (int s = 0; s < sites; ++s) {
      int owner = pick(0, options - 1);
      int arity_partners = pick(1, std::min(options - 1, 6));
      std::vector<int> partners;
      for (int p = 0; p < options && static_cast<int>(partners.size()) < arity_partners; ++p) {
        int cand = pick(0, options - 1);
        if (cand != owner && std::find(partners.begin(), partners.end(), cand) == partners.end())
          partners.push_back(cand);
      }
      if (partners.empty()) partners.push_back((owner + 1) % options);
      std::string product;
      for (std::size_t p = 0; p < partners.size(); ++p)
        product += (p ? " * " : "") + tune_name(partners[p]);
      // Every site's observable effect is scaled by the partner product, so a
      // mutation stays invisible until the owner and all partners are enabled.
      os << "#ifdef " << option_name(owner) << "\n";
      int shape = pick(0, 2);
      if (shape == 0) {
        os << "  state = state + " << product << " * " << pick(1, 3) << ";\n";
      } else if (shape == 1) {
        os << "  if (x % " << pick(2, 4) << " < " << pick(1, 3) << ") {\n";
        os << "    mix = mix + " << product << " * " << pick(1, 3) << ";\n";
        os << "  }\n";
      } else {
        os << "  for (int i = 0; i < " << pick(1, 3) << " + x % " << pick(2, 3) << "; i++) {\n";
        os << "    state = state + " << product << " * (i + 1);\n";
        os << "  }\n";
      }
      os << "#endif\n";
    }
    os << "  mix = mix + state % " << pick(3, 9) << ";\n";
    os << "}\n";
  }

  os << "int entry(int input) {\n";
  os << "  state = input + " << pick(0, 3) << ";\n";
  os << "  mix = " << pick(1, 4) << ";\n";
  for (int f = 0; f < functions; ++f)
    os << "  f" << f << "(input + " << f << ");\n";
  os << "  return state + mix * " << pick(2, 5) << ";\n";
  os << "}\n";

  SourceUnit unit;
  unit.path = "generated_" + std::to_string(seed) + ".cvl";
  unit.text = os.str();
  return unit;
}

// ---------------------------------------------------------------------------
// Bug seeding
// ---------------------------------------------------------------------------

namespace {

struct MutationSite {
  ast::Stmt* stmt = nullptr;
  ast::Expr* literal = nullptr;  // WrongInitializer: the int literal to bump
};

void collect_sites(std::vector<ast::StmtPtr>& body, MutationKind kind,
                   std::vector<MutationSite>& out) {
  for (auto& sp : body) {
    if (!sp) continue;
    ast::Stmt& s = *sp;
    switch (kind) {
      case MutationKind::OffByOneBound:
        if (s.kind == ast::Stmt::Kind::For && s.cond && s.cond->kind == ast::Expr::Kind::Binary &&
            (s.cond->op == "<" || s.cond->op == "<="))
          out.push_back({&s, nullptr});
        break;
      case MutationKind::WrongInitializer:
        if (s.kind == ast::Stmt::Kind::Define && !s.pc.empty() && s.value &&
            s.value->kind == ast::Expr::Kind::IntLit)
          out.push_back({&s, s.value.get()});
        if (s.kind == ast::Stmt::Kind::Decl && s.init && s.init->kind == ast::Expr::Kind::IntLit)
          out.push_back({&s, s.init.get()});
        break;
      case MutationKind::InvertedGuard:
        if (s.kind == ast::Stmt::Kind::If && !s.pc.empty()) out.push_back({&s, nullptr});
        break;
      case MutationKind::WrongAssignTarget:
        if (s.kind == ast::Stmt::Kind::Assign && !s.index &&
            (s.name == "state" || s.name == "mix") && !s.pc.empty())
          out.push_back({&s, nullptr});
        break;
    }
    collect_sites(s.body, kind, out);
    collect_sites(s.else_body, kind, out);
    for (auto& c : s.cases) collect_sites(c.body, kind, out);
  }
}

std::vector<MutationSite> mutation_sites(ast::Program& program, MutationKind kind) {
  std::vector<MutationSite> sites;
  for (auto& item : program.items) {
    if (item.stmt) {
      std::vector<ast::StmtPtr> one;
      one.push_back(std::move(item.stmt));
      collect_sites(one, kind, sites);
      item.stmt = std::move(one.front());
    }
    if (item.func) collect_sites(item.func->body, kind, sites);
  }
  return sites;
}

void rename_ident(ast::Expr* e, const std::string& from, const std::string& to) {
  if (!e) return;
  if ((e->kind == ast::Expr::Kind::Ident || e->kind == ast::Expr::Kind::Index ||
       e->kind == ast::Expr::Kind::Call) &&
      e->name == from)
    e->name = to;
  for (auto& a : e->args) rename_ident(a.get(), from, to);
}

void apply_mutation(MutationSite& site, MutationKind kind, std::mt19937_64& rng) {
  ast::Stmt& s = *site.stmt;
  switch (kind) {
    case MutationKind::OffByOneBound:
      s.cond->op = s.cond->op == "<" ? "<=" : "<";
      break;
    case MutationKind::WrongInitializer:
      site.literal->value += 1 + static_cast<long long>(rng() % 2);
      break;
    case MutationKind::InvertedGuard: {
      auto neg = std::make_unique<ast::Expr>();
      neg->kind = ast::Expr::Kind::Unary;
      neg->op = "!";
      neg->args.push_back(std::move(s.cond));
      s.cond = std::move(neg);
      break;
    }
    case MutationKind::WrongAssignTarget: {
      // The increment lands on the wrong shared accumulator: state += e
      // becomes mix += e (and vice versa), self-references included.
      std::string other = s.name == "state" ? "mix" : "state";
      rename_ident(s.value.get(), s.name, other);
      s.name = other;
      break;
    }
  }
}

std::vector<Configuration> sample_configurations(const std::set<std::string>& options,
                                                 std::uint64_t seed) {
  std::vector<std::string> opts(options.begin(), options.end());
  std::vector<Configuration> configs;
  if (opts.size() <= 7) {
    std::uint64_t total = std::uint64_t{1} << opts.size();
    for (std::uint64_t v = 0; v < total; ++v) {
      Configuration c;
      c.id = "c" + std::to_string(v);
      for (std::size_t i = 0; i < opts.size(); ++i)
        c.selections[opts[i]] = (v >> i) & 1;
      configs.push_back(std::move(c));
    }
    return configs;
  }
  // Mirror the evaluation setup: a seeded sample of 100 distinct configurations.
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> seen;
  while (configs.size() < 100 && seen.size() < (std::uint64_t{1} << opts.size())) {
    std::uint64_t v = rng() & ((std::uint64_t{1} << opts.size()) - 1);
    if (!seen.insert(v).second) continue;
    Configuration c;
    c.id = "c" + std::to_string(configs.size());
    for (std::size_t i = 0; i < opts.size(); ++i)
      c.selections[opts[i]] = (v >> i) & 1;
    configs.push_back(std::move(c));
  }
  return configs;
}

}  // namespace

SeedResult seed_bug(const SourceUnit& program, MutationKind kind, std::uint64_t rng_seed) {
  ParsedProgram pristine = parse_program(program);
  std::string canonical = ast::pretty_print(*pristine.program);
  SourceUnit canonical_unit{program.path, canonical};
  ParsedProgram reference = parse_program(canonical_unit);

  std::mt19937_64 rng(rng_seed);
  const int kMaxAttempts = 40;
  std::optional<SeedResult> fallback;  // configuration-dependent but arity < 2
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    ParsedProgram working = parse_program(canonical_unit);
    std::vector<MutationSite> sites = mutation_sites(*working.program, kind);
    if (sites.empty())
      throw InputError(std::string("no viable mutation site for kind ") + to_string(kind));
    MutationSite& site = sites[rng() % sites.size()];
    StatementId target = site.stmt->stmt_id;
    apply_mutation(site, kind, rng);

    SourceUnit mutated{program.path, ast::pretty_print(*working.program)};
    ParsedProgram mutated_parsed = parse_program(mutated);

    // Mutations preserve statement structure, so ids align with the pristine
    // canonical parse and `target` names the same statement in both.
    std::vector<Configuration> configs =
        sample_configurations(reference.model.options, rng_seed + attempt);
    bool any_pass = false, any_fail = false;
    ConfigurationSuite suite;
    for (const Configuration& c : configs) {
      bool config_fails = false;
      for (long long input = 0; input < 4; ++input) {
        RunOutcome want = interpret(reference, c, "entry", input);
        RunOutcome got = interpret(mutated_parsed, c, "entry", input);
        bool pass = !got.fault && !want.fault && got.result == want.result;
        if (want.fault) pass = got.fault;  // pristine fault: same behavior expected
        if (!pass) config_fails = true;
      }
      (config_fails ? any_fail : any_pass) = true;
      suite.configurations.push_back(c);
      suite.verdicts.push_back({c.id, "t0", !config_fails});
    }
    if (!any_fail || !any_pass) continue;  // not configuration-dependent; resample

    std::vector<SuspiciousPartialConfiguration> spcs = brute_force_spcs(suite);
    if (spcs.empty()) continue;
    int arity = static_cast<int>(spcs.front().selections.size());

    SeedResult out;
    out.mutated = mutated;
    out.bug.kind = kind;
    out.bug.target = target;
    out.bug.intended = spcs.front().selections;
    out.bug.arity = arity;
    out.bug.description = std::string(to_string(kind)) + " at statement " + std::to_string(target);
    if (arity >= 2) return out;
    if (!fallback) fallback = std::move(out);  // keep searching for an interactional site
  }
  if (fallback) return std::move(*fallback);
  throw InputError(std::string("could not seed a configuration-dependent bug of kind ") +
                   to_string(kind) + " (all candidate mutations were config-independent)");
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

BugEvaluationInput prepare_bug(const CorpusSpec& spec, int bug_index) {
  if (spec.options < 2 || spec.options > 16) throw InputError("corpus options must be 2..16");
  if (spec.bugs < 0) throw InputError("corpus bug count must be >= 0");
  const MutationKind kinds[] = {MutationKind::OffByOneBound, MutationKind::WrongInitializer,
                                MutationKind::InvertedGuard, MutationKind::WrongAssignTarget};

  std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(bug_index) * 7919;
  for (std::uint64_t round = 0;; ++round) {
    SourceUnit program = generate_program(seed + round * 104729, spec.options, spec.functions);
    MutationKind kind = kinds[(static_cast<std::size_t>(bug_index) + round) % 4];
    SeedResult seeded;
    try {
      seeded = seed_bug(program, kind, seed + round);
    } catch (const InputError&) {
      if (round >= 8) throw;
      continue;
    }

    BugEvaluationInput input;
    input.pristine = parse_program({program.path, ast::pretty_print(*parse_program(program).program)});
    input.mutated = parse_program(seeded.mutated);
    input.bug = seeded.bug;

    std::vector<Configuration> configs =
        sample_configurations(input.mutated.model.options, seed + round);
    for (const Configuration& c : configs) {
      bool config_fails = false;
      for (int t = 0; t < spec.tests; ++t) {
        RunOutcome want = interpret(input.pristine, c, "entry", t);
        RunOutcome got = interpret(input.mutated, c, "entry", t);
        bool pass = !got.fault && !want.fault && got.result == want.result;
        if (want.fault) pass = got.fault;
        ExecutionTrace trace;
        trace.config = c.id;
        trace.test = "t" + std::to_string(t);
        trace.executed = got.trace;
        input.traces.push_back(std::move(trace));
        input.suite.verdicts.push_back({c.id, "t" + std::to_string(t), pass});
        if (!pass) config_fails = true;
      }
      input.suite.configurations.push_back(c);
      (void)config_fails;
    }
    SuitePartition part = partition_suite(input.suite);
    if (part.failing.empty() || part.passing.empty()) continue;  // tests differ from seeding probe
    return input;
  }
}

namespace {

ModeMetrics evaluate_mode(const std::set<StatementId>& domain, const SpectrumCounters& counters,
                          Formula formula, RankMode mode, StatementId target, int total) {
  ModeMetrics m;
  m.sds = static_cast<int>(domain.size());
  if (domain.empty()) return m;  // miss with empty domain
  RankedReport report = rank(domain, counters, formula, mode);
  m.exam = exam(report, {target}, total);
  for (const RankedEntry& e : report.entries)
    if (e.stmt == target) m.rank = e.rank;
  return m;
}

}  // namespace

ExperimentResult run_experiment(const CorpusSpec& spec, int jobs) {
  ExperimentResult result;
  result.rows.resize(static_cast<std::size_t>(spec.bugs));
  std::exception_ptr failure;
  std::mutex failure_mutex;

  parallel_for(static_cast<std::size_t>(spec.bugs), jobs, [&](std::size_t b) {
    try {
      auto started = std::chrono::steady_clock::now();
      BugEvaluationInput input = prepare_bug(spec, static_cast<int>(b));
      const ProgramModel& model = input.mutated.model;
      int total = static_cast<int>(model.statements.size());
      SpectrumCounters counters = count_spectra(input.traces, input.suite);

      // Baseline domain: every statement executed anywhere in the suite.
      std::set<StatementId> baseline_domain;
      for (const ExecutionTrace& t : input.traces)
        baseline_domain.insert(t.executed.begin(), t.executed.end());

      // CoFL domain: union of suspicious sets over all detected SPCs.
      std::set<StatementId> cofl_domain;
      std::vector<SuspiciousPartialConfiguration> spcs = detect_spcs(input.suite);
      for (const SuspiciousPartialConfiguration& spc : spcs) {
        InteractionContext ctx = build_interaction_context(model, spc, input.suite);
        SuspiciousSet susp = suspicious_statements(model, ctx, input.traces, input.suite);
        cofl_domain.insert(susp.statements.begin(), susp.statements.end());
      }

      ExperimentRow row;
      row.bug = static_cast<int>(b);
      row.kind = input.bug.kind;
      row.arity = input.bug.arity;
      row.intended = input.bug.intended.str();
      row.cofl_retained = cofl_domain.count(input.bug.target) != 0;
      for (int f = 0; f < 2; ++f) {
        Formula formula = f == 0 ? Formula::Tarantula : Formula::Ochiai;
        row.metrics[0][f] = evaluate_mode(baseline_domain, counters, formula, RankMode::Baseline,
                                          input.bug.target, total);
        row.metrics[1][f] =
            evaluate_mode(cofl_domain, counters, formula, RankMode::Cofl, input.bug.target, total);
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              started)
                        .count();
      result.rows[b] = std::move(row);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  result.aggregates = recompute_aggregates(result.rows);
  return result;
}

ExperimentAggregates recompute_aggregates(const std::vector<ExperimentRow>& rows) {
  ExperimentAggregates agg;
  int retained = 0;
  for (int m = 0; m < 2; ++m)
    for (int f = 0; f < 2; ++f) {
      double exam_sum = 0.0, sds_sum = 0.0;
      int exam_n = 0;
      for (const ExperimentRow& row : rows) {
        const ModeMetrics& metrics = row.metrics[m][f];
        sds_sum += metrics.sds;
        if (metrics.exam) {
          exam_sum += *metrics.exam;
          ++exam_n;
        } else {
          ++agg.misses[m][f];
        }
      }
      agg.mean_exam[m][f] = exam_n ? exam_sum / exam_n : 0.0;
      agg.mean_sds[m][f] = rows.empty() ? 0.0 : sds_sum / static_cast<double>(rows.size());
    }
  for (const ExperimentRow& row : rows)
    if (row.cofl_retained) ++retained;
  agg.retention_rate = rows.empty() ? 0.0 : static_cast<double>(retained) / rows.size();
  return agg;
}

std::string experiment_table_text(const ExperimentResult& result) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "bug  kind                  arity  retained  "
        "base-exam(T)  cofl-exam(T)  base-sds  cofl-sds  time-ms\n";
  for (const ExperimentRow& row : result.rows) {
    auto exam_str = [](const ModeMetrics& m) {
      if (!m.exam) return std::string("miss");
      std::ostringstream t;
      t << std::fixed << std::setprecision(2) << *m.exam;
      return t.str();
    };
    os << std::left << std::setw(5) << row.bug << std::setw(22) << to_string(row.kind)
       << std::setw(7) << row.arity << std::setw(10) << (row.cofl_retained ? "yes" : "no")
       << std::setw(14) << exam_str(row.metrics[0][0]) << std::setw(14)
       << exam_str(row.metrics[1][0]) << std::setw(10) << row.metrics[0][0].sds << std::setw(10)
       << row.metrics[1][0].sds << row.wall_ms << "\n";
  }
  const ExperimentAggregates& a = result.aggregates;
  os << "\n";
  os << "aggregate            EXAM      SDS       misses\n";
  const char* labels[2][2] = {{"tarantula", "ochiai"}, {"cofl+tarantula", "cofl+ochiai"}};
  for (int m = 0; m < 2; ++m)
    for (int f = 0; f < 2; ++f)
      os << std::left << std::setw(21) << labels[m][f] << std::setw(10) << a.mean_exam[m][f]
         << std::setw(10) << a.mean_sds[m][f] << a.misses[m][f] << "\n";
  os << "cofl retention rate: " << a.retention_rate << "\n";
  return os.str();
}

std::string experiment_table_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  const char* modes[2] = {"baseline", "cofl"};
  const char* formulas[2] = {"tarantula", "ochiai"};
  for (const ExperimentRow& row : result.rows) {
    nlohmann::json r;
    r["bug"] = row.bug;
    r["kind"] = to_string(row.kind);
    r["arity"] = row.arity;
    r["intended"] = row.intended;
    r["retained"] = row.cofl_retained;
    r["wall_ms"] = row.wall_ms;
    for (int m = 0; m < 2; ++m)
      for (int f = 0; f < 2; ++f) {
        nlohmann::json metrics;
        const ModeMetrics& mm = row.metrics[m][f];
        if (mm.exam)
          metrics["exam"] = *mm.exam;
        else
          metrics["exam"] = nullptr;
        if (mm.rank)
          metrics["rank"] = *mm.rank;
        else
          metrics["rank"] = nullptr;
        metrics["sds"] = mm.sds;
        r[std::string(modes[m]) + "_" + formulas[f]] = metrics;
      }
    j["rows"].push_back(r);
  }
  nlohmann::json agg;
  for (int m = 0; m < 2; ++m)
    for (int f = 0; f < 2; ++f) {
      nlohmann::json cell;
      cell["mean_exam"] = result.aggregates.mean_exam[m][f];
      cell["mean_sds"] = result.aggregates.mean_sds[m][f];
      cell["misses"] = result.aggregates.misses[m][f];
      agg[std::string(modes[m]) + "_" + formulas[f]] = cell;
    }
  agg["retention_rate"] = result.aggregates.retention_rate;
  j["aggregates"] = agg;
  return j.dump(2) + "\n";
}

}  // namespace cofl
