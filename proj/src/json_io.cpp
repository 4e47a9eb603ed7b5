#include "cofl/json_io.hpp"

#include <fstream>
#include <sstream>

#include "cofl/parser.hpp"
#include "json.hpp"

namespace cofl {

namespace {

using nlohmann::json;

json literal_to_json(const FeatureLiteral& lit) {
  return json{{"option", lit.option}, {"value", lit.value}};
}

FeatureLiteral literal_from_json(const json& j) {
  return {j.at("option").get<std::string>(), j.at("value").get<bool>()};
}

json entity_to_json(const Entity& e) {
  return json{{"scope", e.scope},
              {"name", e.name},
              {"kind", e.kind == EntityKind::Function ? "function" : "variable"}};
}

Entity entity_from_json(const json& j) {
  Entity e;
  e.scope = j.at("scope").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.kind = j.at("kind").get<std::string>() == "function" ? EntityKind::Function
                                                         : EntityKind::Variable;
  return e;
}

DefKind def_kind_from_string(const std::string& s) {
  if (s == "value") return DefKind::Value;
  if (s == "body") return DefKind::Body;
  if (s == "UNINIT") return DefKind::Uninit;
  if (s == "UNDEFINED") return DefKind::Undefined;
  throw InputError("unknown def kind '" + s + "'");
}

}  // namespace

std::string model_to_json(const ProgramModel& model) {
  json j;
  j["statements"] = json::array();
  for (const Statement& s : model.statements) {
    json st;
    st["id"] = s.id;
    st["file"] = s.file;
    st["line_begin"] = s.line_begin;
    st["line_end"] = s.line_end;
    st["text"] = s.text;
    st["pc"] = json::array();
    for (const FeatureLiteral& lit : s.pc) st["pc"].push_back(literal_to_json(lit));
    st["defs"] = json::array();
    for (const auto& [e, kind] : s.defs) {
      json d = entity_to_json(e);
      d["def"] = to_string(kind);
      st["defs"].push_back(d);
    }
    st["uses"] = json::array();
    for (const Entity& e : s.uses) st["uses"].push_back(entity_to_json(e));
    if (s.control_parent)
      st["control_parent"] = *s.control_parent;
    else
      st["control_parent"] = nullptr;
    j["statements"].push_back(st);
  }
  j["declared_features"] = json::array();
  for (const FeatureLiteral& lit : model.declared_features)
    j["declared_features"].push_back(literal_to_json(lit));
  return j.dump(2) + "\n";
}

ProgramModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  ProgramModel model;
  try {
    for (const json& st : j.at("statements")) {
      Statement s;
      s.id = st.at("id").get<int>();
      s.file = st.value("file", std::string{});
      s.line_begin = st.value("line_begin", 0);
      s.line_end = st.value("line_end", 0);
      s.text = st.value("text", std::string{});
      for (const json& lit : st.at("pc")) s.pc.push_back(literal_from_json(lit));
      for (const json& d : st.at("defs"))
        s.defs.emplace_back(entity_from_json(d), def_kind_from_string(d.at("def").get<std::string>()));
      for (const json& u : st.at("uses")) s.uses.push_back(entity_from_json(u));
      if (st.contains("control_parent") && !st.at("control_parent").is_null())
        s.control_parent = st.at("control_parent").get<int>();
      model.statements.push_back(std::move(s));
    }
    if (j.contains("declared_features"))
      for (const json& lit : j.at("declared_features"))
        model.declared_features.insert(literal_from_json(lit));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
  model.finalize();
  return model;
}

std::string suite_to_json(const ConfigurationSuite& suite) {
  json j;
  j["configurations"] = json::array();
  for (const Configuration& c : suite.configurations) {
    json sel = json::object();
    for (const auto& [o, v] : c.selections) sel[o] = v;
    j["configurations"].push_back(json{{"id", c.id}, {"selections", sel}});
  }
  j["verdicts"] = json::array();
  for (const Verdict& v : suite.verdicts)
    j["verdicts"].push_back(json{{"config", v.config}, {"test", v.test}, {"pass", v.pass}});
  return j.dump(2) + "\n";
}

ConfigurationSuite suite_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("suite file is not valid JSON: ") + e.what());
  }
  ConfigurationSuite suite;
  try {
    for (const json& c : j.at("configurations")) {
      Configuration cfg;
      cfg.id = c.at("id").get<std::string>();
      for (auto it = c.at("selections").begin(); it != c.at("selections").end(); ++it)
        cfg.selections[it.key()] = it.value().get<bool>();
      suite.configurations.push_back(std::move(cfg));
    }
    for (const json& v : j.at("verdicts"))
      suite.verdicts.push_back({v.at("config").get<std::string>(), v.at("test").get<std::string>(),
                                v.at("pass").get<bool>()});
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed suite file: ") + e.what());
  }
  suite.validate();
  return suite;
}

std::string traces_to_ndjson(const std::vector<ExecutionTrace>& traces) {
  std::ostringstream os;
  for (const ExecutionTrace& t : traces) {
    json j;
    j["config"] = t.config;
    j["test"] = t.test;
    j["executed"] = json::array();
    for (StatementId s : t.executed) j["executed"].push_back(s);
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<ExecutionTrace> traces_from_ndjson(const std::string& text) {
  std::vector<ExecutionTrace> traces;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      ExecutionTrace t;
      t.config = j.at("config").get<std::string>();
      t.test = j.at("test").get<std::string>();
      for (const json& s : j.at("executed")) t.executed.insert(s.get<int>());
      traces.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw InputError("traces line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return traces;
}

std::string spcs_to_json(const std::vector<SuspiciousPartialConfiguration>& spcs) {
  json j = json::array();
  for (const SuspiciousPartialConfiguration& spc : spcs) {
    json sel = json::object();
    for (const FeatureSelection& s : spc.selections.selections) sel[s.option] = s.value;
    json w = json::array();
    for (const std::string& id : spc.witness_failing) w.push_back(id);
    j.push_back(json{{"selections", sel}, {"witnesses", w}});
  }
  return j.dump(2) + "\n";
}

std::vector<SuspiciousPartialConfiguration> spcs_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("SPC file is not valid JSON: ") + e.what());
  }
  std::vector<SuspiciousPartialConfiguration> out;
  try {
    for (const json& item : j) {
      SuspiciousPartialConfiguration spc;
      std::vector<FeatureSelection> sels;
      for (auto it = item.at("selections").begin(); it != item.at("selections").end(); ++it)
        sels.push_back({it.key(), it.value().get<bool>()});
      spc.selections = SelectionSet(std::move(sels));
      if (item.contains("witnesses"))
        for (const json& w : item.at("witnesses")) spc.witness_failing.push_back(w.get<std::string>());
      out.push_back(std::move(spc));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed SPC file: ") + e.what());
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

ProgramModel load_model(const std::string& path) {
  std::string text = read_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return model_from_json(text);
  ParseResult result = parse({SourceUnit{path, text}});
  if (!result.ok()) {
    std::string msg = "parse failed:";
    for (const Diagnostic& d : result.diagnostics)
      if (d.severity == Severity::Error) msg += "\n  " + d.str();
    throw InputError(msg);
  }
  return std::move(result.model);
}

}  // namespace cofl
