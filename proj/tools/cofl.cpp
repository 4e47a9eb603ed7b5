#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cofl/dependence.hpp"
#include "cofl/harness.hpp"
#include "cofl/interactions.hpp"
#include "cofl/json_io.hpp"
#include "cofl/parser.hpp"
#include "cofl/ranking.hpp"
#include "cofl/spc.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitEmptyResult = 2;
constexpr int kExitBudgetExceeded = 3;

struct CommonFlags {
  std::string mode = "cofl";
  std::string formula = "tarantula";
  std::string direction = "both";
  std::string propagation = "on";
  std::uint64_t budget = std::uint64_t{1} << 20;
  std::string format = "text";
  int jobs = 1;
  std::string output;
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    cofl::write_file(out_path, content);
}

std::string spc_text(const std::vector<cofl::SuspiciousPartialConfiguration>& spcs) {
  std::ostringstream os;
  os << "suspicious partial configurations: " << spcs.size() << "\n";
  for (std::size_t i = 0; i < spcs.size(); ++i) {
    os << "spc " << (i + 1) << ": " << spcs[i].selections.str() << " witnesses:";
    for (const std::string& w : spcs[i].witness_failing) os << ' ' << w;
    os << "\n";
  }
  return os.str();
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct LocalizeOutput {
  std::vector<cofl::SuspiciousPartialConfiguration> spcs;
  cofl::RankedReport report;
  const cofl::ProgramModel* model = nullptr;
  std::optional<double> exam_value;
  bool exam_miss = false;
  int total_statements = 0;
};

std::string localize_text(const LocalizeOutput& lo) {
  std::ostringstream os;
  os << "mode: " << to_string(lo.report.mode) << "\n";
  os << "formula: " << to_string(lo.report.formula) << "\n";
  os << spc_text(lo.spcs);
  os << "sds: " << lo.report.sds << "\n";
  if (lo.exam_value)
    os << "exam: " << format_score(*lo.exam_value) << "\n";
  else if (lo.exam_miss)
    os << "exam: miss\n";
  os << "rank stmt score    location\n";
  for (const cofl::RankedEntry& e : lo.report.entries) {
    const cofl::Statement& s = lo.model->statements[static_cast<std::size_t>(e.stmt)];
    os << e.rank << ' ' << e.stmt << ' ' << format_score(e.score) << ' ' << s.file << ':'
       << s.line_begin << '-' << s.line_end << ' ' << s.text << "\n";
  }
  return os.str();
}

std::string localize_json(const LocalizeOutput& lo) {
  nlohmann::json j;
  j["mode"] = to_string(lo.report.mode);
  j["formula"] = to_string(lo.report.formula);
  j["spcs"] = nlohmann::json::parse(cofl::spcs_to_json(lo.spcs));
  j["sds"] = lo.report.sds;
  if (lo.exam_value)
    j["exam"] = *lo.exam_value;
  else if (lo.exam_miss)
    j["exam"] = "miss";
  j["ranking"] = nlohmann::json::array();
  for (const cofl::RankedEntry& e : lo.report.entries) {
    const cofl::Statement& s = lo.model->statements[static_cast<std::size_t>(e.stmt)];
    nlohmann::json entry;
    entry["rank"] = e.rank;
    entry["stmt"] = e.stmt;
    entry["score"] = format_score(e.score);
    entry["file"] = s.file;
    entry["line_begin"] = s.line_begin;
    entry["line_end"] = s.line_end;
    entry["text"] = s.text;
    j["ranking"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

int cmd_parse(const std::vector<std::string>& paths, const std::string& output) {
  std::vector<cofl::SourceUnit> units;
  for (const std::string& p : paths) units.push_back({p, cofl::read_file(p)});
  cofl::ParseResult result = cofl::parse(units);
  for (const cofl::Diagnostic& d : result.diagnostics) std::cerr << d.str() << "\n";
  if (!result.ok()) return kExitInputError;
  emit(output, cofl::model_to_json(result.model));
  for (const std::string& w : cofl::lint_model(result.model))
    std::cerr << "lint: " << w << "\n";
  return kExitOk;
}

int cmd_spc(const std::string& model_path, const std::string& suite_path, const CommonFlags& flags) {
  if (!model_path.empty()) (void)cofl::load_model(model_path);  // validate when given
  cofl::ConfigurationSuite suite = cofl::suite_from_json(cofl::read_file(suite_path));
  cofl::SpcOptions opts;
  opts.budget = flags.budget;
  opts.jobs = flags.jobs;
  std::vector<cofl::SuspiciousPartialConfiguration> spcs = cofl::detect_spcs(suite, opts);
  if (flags.format == "json")
    emit(flags.output, cofl::spcs_to_json(spcs));
  else
    emit(flags.output, spc_text(spcs));
  return spcs.empty() ? kExitEmptyResult : kExitOk;
}

int cmd_interactions(const std::string& model_path, const std::string& spc_path,
                     const std::string& suite_path, const std::string& config_id,
                     const CommonFlags& flags) {
  cofl::ProgramModel model = cofl::load_model(model_path);
  cofl::ConfigurationSuite suite = cofl::suite_from_json(cofl::read_file(suite_path));
  std::vector<cofl::SuspiciousPartialConfiguration> spcs =
      cofl::spcs_from_json(cofl::read_file(spc_path));
  const cofl::Configuration* config = suite.find(config_id);
  if (!config) throw cofl::InputError("configuration " + config_id + " is not in the suite");
  bool propagation = flags.propagation == "on";

  nlohmann::json jall = nlohmann::json::array();
  std::ostringstream os;
  for (const cofl::SuspiciousPartialConfiguration& spc : spcs) {
    std::vector<cofl::FeatureLiteral> literals;
    for (const cofl::FeatureSelection& sel : spc.selections.selections) {
      cofl::FeatureLiteral lit{sel.option, sel.value};
      if (model.features.count(lit)) literals.push_back(lit);
      if (!sel.value && model.features.count({sel.option, true}))
        literals.push_back({sel.option, true});
    }
    for (std::size_t i = 0; i < literals.size(); ++i)
      for (std::size_t j = i + 1; j < literals.size(); ++j) {
        auto inter =
            cofl::detect_interaction(model, literals[i], literals[j], *config, propagation);
        if (!inter) continue;
        os << to_string(literals[i]) << " x " << to_string(literals[j]) << ": "
           << to_string(inter->kind) << " via";
        for (const cofl::Entity& e : inter->mediating) os << ' ' << e.str();
        os << " -> statements";
        for (cofl::StatementId s : inter->implementation) os << ' ' << s;
        os << "\n";
        nlohmann::json ji;
        ji["f1"] = to_string(literals[i]);
        ji["f2"] = to_string(literals[j]);
        ji["kind"] = to_string(inter->kind);
        ji["entities"] = nlohmann::json::array();
        for (const cofl::Entity& e : inter->mediating) ji["entities"].push_back(e.str());
        ji["implementation"] = nlohmann::json::array();
        for (cofl::StatementId s : inter->implementation) ji["implementation"].push_back(s);
        jall.push_back(ji);
      }
  }
  if (flags.format == "json")
    emit(flags.output, jall.dump(2) + "\n");
  else
    emit(flags.output, os.str());
  return jall.empty() ? kExitEmptyResult : kExitOk;
}

int cmd_localize(const std::string& model_path, const std::string& suite_path,
                 const std::string& traces_path, const std::vector<int>& faulty,
                 const CommonFlags& flags) {
  cofl::ProgramModel model = cofl::load_model(model_path);
  cofl::ConfigurationSuite suite = cofl::suite_from_json(cofl::read_file(suite_path));
  std::vector<cofl::ExecutionTrace> traces =
      cofl::traces_from_ndjson(cofl::read_file(traces_path));
  for (const cofl::ExecutionTrace& t : traces) cofl::validate_trace(model, suite, t);

  cofl::RankMode mode = flags.mode == "baseline" ? cofl::RankMode::Baseline : cofl::RankMode::Cofl;
  if (flags.mode != "baseline" && flags.mode != "cofl")
    throw cofl::InputError("unknown mode '" + flags.mode + "' (baseline|cofl)");
  cofl::Formula formula = cofl::formula_from_string(flags.formula);
  cofl::Direction direction = cofl::direction_from_string(flags.direction);
  bool propagation = flags.propagation == "on";
  if (flags.propagation != "on" && flags.propagation != "off")
    throw cofl::InputError("unknown propagation flag '" + flags.propagation + "' (on|off)");

  LocalizeOutput lo;
  lo.model = &model;
  lo.total_statements = static_cast<int>(model.statements.size());

  std::set<cofl::StatementId> domain;
  if (mode == cofl::RankMode::Baseline) {
    for (const cofl::ExecutionTrace& t : traces)
      domain.insert(t.executed.begin(), t.executed.end());
  } else {
    cofl::SpcOptions opts;
    opts.budget = flags.budget;
    opts.jobs = flags.jobs;
    lo.spcs = cofl::detect_spcs(suite, opts);
    if (lo.spcs.empty()) {
      emit(flags.output, flags.format == "json" ? std::string("{\"spcs\": [], \"ranking\": []}\n")
                                                : std::string("no suspicious partial configuration; "
                                                              "no failing configurations?\n"));
      return kExitEmptyResult;
    }
    for (const cofl::SuspiciousPartialConfiguration& spc : lo.spcs) {
      cofl::InteractionContext ctx = cofl::build_interaction_context(model, spc, suite, propagation);
      cofl::SuspiciousSet susp =
          cofl::suspicious_statements(model, ctx, traces, suite, direction);
      domain.insert(susp.statements.begin(), susp.statements.end());
    }
    if (domain.empty()) {
      emit(flags.output,
           flags.format == "json"
               ? std::string("{\"ranking\": [], \"note\": \"SPC produced no suspicious statements\"}\n")
               : std::string("the SPC produced no suspicious statements\n"));
      return kExitEmptyResult;
    }
  }

  cofl::SpectrumCounters counters = cofl::count_spectra(traces, suite);
  lo.report = cofl::rank(domain, counters, formula, mode);
  if (!faulty.empty()) {
    std::set<cofl::StatementId> faulty_set(faulty.begin(), faulty.end());
    lo.exam_value = cofl::exam(lo.report, faulty_set, lo.total_statements);
    lo.exam_miss = !lo.exam_value.has_value();
  }
  emit(flags.output, flags.format == "json" ? localize_json(lo) : localize_text(lo));
  return kExitOk;
}

int cmd_eval(const std::string& corpus_path, const CommonFlags& flags) {
  cofl::CorpusSpec spec;
  if (!corpus_path.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(cofl::read_file(corpus_path));
    } catch (const nlohmann::json::exception& e) {
      throw cofl::InputError(std::string("corpus spec is not valid JSON: ") + e.what());
    }
    spec.bugs = j.value("bugs", spec.bugs);
    spec.seed = j.value("seed", spec.seed);
    spec.options = j.value("options", spec.options);
    spec.functions = j.value("functions", spec.functions);
    spec.tests = j.value("tests", spec.tests);
  }
  if (const char* env_seed = std::getenv("COFL_SEED")) spec.seed = std::strtoull(env_seed, nullptr, 10);
  cofl::ExperimentResult result = cofl::run_experiment(spec, flags.jobs);
  emit(flags.output, flags.format == "json" ? cofl::experiment_table_json(result)
                                            : cofl::experiment_table_text(result));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cofl: configuration-dependent fault localization"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> parse_paths;
  std::string model_path, suite_path, traces_path, spc_path, config_id, corpus_path;
  std::vector<int> faulty;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--budget", flags.budget, "subset-enumeration budget (candidate sets)");
    cmd->add_option("--format", flags.format, "output format (text|json)")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::Range(1, 256));
    cmd->add_option("-o,--output", flags.output, "write the result to a file");
  };

  CLI::App* cparse = app.add_subcommand("parse", "parse CVL sources into a model file");
  cparse->add_option("files", parse_paths, "input .cvl files")->required();
  cparse->add_option("-o,--output", flags.output, "write the model JSON to a file");

  CLI::App* cspc = app.add_subcommand("spc", "detect suspicious partial configurations");
  cspc->add_option("--model", model_path, "model file (.json) or source (.cvl)");
  cspc->add_option("--suite", suite_path, "configuration suite JSON")->required();
  add_common(cspc);

  CLI::App* cinter = app.add_subcommand("interactions", "inspect feature interactions of SPCs");
  cinter->add_option("--model", model_path)->required();
  cinter->add_option("--spc", spc_path, "SPC list JSON (from the spc command)")->required();
  cinter->add_option("--suite", suite_path)->required();
  cinter->add_option("--config", config_id, "configuration id for propagation")->required();
  cinter->add_option("--propagation", flags.propagation, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  add_common(cinter);

  CLI::App* cloc = app.add_subcommand("localize", "rank suspicious statements");
  cloc->add_option("--model", model_path)->required();
  cloc->add_option("--suite", suite_path)->required();
  cloc->add_option("--traces", traces_path)->required();
  cloc->add_option("--mode", flags.mode, "baseline|cofl")
      ->check(CLI::IsMember({"baseline", "cofl"}));
  cloc->add_option("--formula", flags.formula, "tarantula|ochiai")
      ->check(CLI::IsMember({"tarantula", "ochiai"}));
  cloc->add_option("--direction", flags.direction, "forward|backward|both")
      ->check(CLI::IsMember({"forward", "backward", "both"}));
  cloc->add_option("--propagation", flags.propagation, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cloc->add_option("--faulty", faulty, "ground-truth faulty statement ids (enables EXAM)");
  add_common(cloc);

  CLI::App* ceval = app.add_subcommand("eval", "run the seeded-bug comparison experiment");
  ceval->add_option("--corpus", corpus_path, "corpus spec JSON");
  add_common(ceval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cparse->parsed()) return cmd_parse(parse_paths, flags.output);
    if (cspc->parsed()) return cmd_spc(model_path, suite_path, flags);
    if (cinter->parsed())
      return cmd_interactions(model_path, spc_path, suite_path, config_id, flags);
    if (cloc->parsed()) return cmd_localize(model_path, suite_path, traces_path, faulty, flags);
    if (ceval->parsed()) return cmd_eval(corpus_path, flags);
  } catch (const cofl::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudgetExceeded;
  } catch (const cofl::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
