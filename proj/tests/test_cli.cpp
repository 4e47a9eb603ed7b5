#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cofl/json_io.hpp"
#include "json.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int exit_code = -1;
  std::string output_file;
};

std::string cli() { return COFL_CLI_PATH; }

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "cofl_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) { return cofl::read_file(p.string()); }

}  // namespace

TEST_CASE("parse emits a model file and exits 0") {
  fs::path model = temp_dir() / "km.model.json";
  int code = run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string());
  CHECK(code == 0);
  CHECK(fs::exists(model));
  CHECK_NOTHROW(cofl::model_from_json(slurp(model)));
}

TEST_CASE("parse reports diagnostics and exits 1 on bad input") {
  fs::path bad = temp_dir() / "bad.cvl";
  cofl::write_file(bad.string(), "#ifdef A\nint x;\n");
  CHECK(run("parse " + bad.string()) == 1);
}

TEST_CASE("spc finds the running example's configuration and exits 0") {
  fs::path out = temp_dir() / "spcs.json";
  int code = run("spc --suite " + testsupport::fixture("kernel_mini.suite.json") +
                 " --format json -o " + out.string());
  CHECK(code == 0);
  auto spcs = cofl::spcs_from_json(slurp(out));
  REQUIRE(spcs.size() == 1);
  CHECK(spcs.front().selections.size() == 5);
}

TEST_CASE("spc on an all-pass suite exits 2") {
  fs::path suite = temp_dir() / "allpass.json";
  cofl::ConfigurationSuite s = testsupport::make_suite({"A"}, {"T", "F"}, {});
  cofl::write_file(suite.string(), cofl::suite_to_json(s));
  CHECK(run("spc --suite " + suite.string()) == 2);
}

TEST_CASE("spc propagates the budget as exit 3") {
  std::vector<std::string> options;
  for (int i = 0; i < 22; ++i) options.push_back("O" + std::to_string(i));
  cofl::ConfigurationSuite s =
      testsupport::make_suite(options, {std::string(22, 'T'), std::string(22, 'F')}, {0});
  fs::path suite = temp_dir() / "wide.json";
  cofl::write_file(suite.string(), cofl::suite_to_json(s));
  CHECK(run("spc --suite " + suite.string() + " --budget 1024") == 3);
}

TEST_CASE("localize produces byte-identical output across runs and job counts") {
  fs::path model = temp_dir() / "km2.model.json";
  REQUIRE(run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string()) == 0);
  std::string base_args = "localize --model " + model.string() + " --suite " +
                          testsupport::fixture("kernel_mini.suite.json") + " --traces " +
                          testsupport::fixture("kernel_mini.traces.ndjson");
  fs::path out1 = temp_dir() / "loc1.txt";
  fs::path out2 = temp_dir() / "loc2.txt";
  fs::path out8 = temp_dir() / "loc8.txt";
  REQUIRE(run(base_args + " --jobs 1 -o " + out1.string()) == 0);
  REQUIRE(run(base_args + " --jobs 1 -o " + out2.string()) == 0);
  REQUIRE(run(base_args + " --jobs 8 -o " + out8.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1) == slurp(out8));
}

TEST_CASE("text and JSON reports carry the same ranking") {
  fs::path model = temp_dir() / "km3.model.json";
  REQUIRE(run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string()) == 0);
  std::string base_args = "localize --model " + model.string() + " --suite " +
                          testsupport::fixture("kernel_mini.suite.json") + " --traces " +
                          testsupport::fixture("kernel_mini.traces.ndjson");
  fs::path text_out = temp_dir() / "loc.txt";
  fs::path json_out = temp_dir() / "loc.json";
  REQUIRE(run(base_args + " -o " + text_out.string()) == 0);
  REQUIRE(run(base_args + " --format json -o " + json_out.string()) == 0);

  // Structural diff: parse the text table back into (rank, stmt, score) rows.
  struct Row {
    int rank;
    int stmt;
    std::string score;
  };
  std::vector<Row> text_rows;
  {
    std::istringstream is(slurp(text_out));
    std::string line;
    bool in_table = false;
    while (std::getline(is, line)) {
      if (line.rfind("rank stmt score", 0) == 0) {
        in_table = true;
        continue;
      }
      if (!in_table || line.empty()) continue;
      std::istringstream ls(line);
      Row r;
      ls >> r.rank >> r.stmt >> r.score;
      text_rows.push_back(r);
    }
  }
  nlohmann::json j = nlohmann::json::parse(slurp(json_out));
  REQUIRE(j.at("ranking").size() == text_rows.size());
  CHECK(j.at("sds").get<int>() == static_cast<int>(text_rows.size()));
  for (std::size_t i = 0; i < text_rows.size(); ++i) {
    CHECK(j.at("ranking")[i].at("rank").get<int>() == text_rows[i].rank);
    CHECK(j.at("ranking")[i].at("stmt").get<int>() == text_rows[i].stmt);
    CHECK(j.at("ranking")[i].at("score").get<std::string>() == text_rows[i].score);
  }
}

TEST_CASE("localize reports the running example's four statements") {
  fs::path model = temp_dir() / "km6.model.json";
  REQUIRE(run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string()) == 0);
  fs::path out = temp_dir() / "cofl.json";
  REQUIRE(run("localize --model " + model.string() + " --suite " +
              testsupport::fixture("kernel_mini.suite.json") + " --traces " +
              testsupport::fixture("kernel_mini.traces.ndjson") + " --format json -o " +
              out.string()) == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(out));
  std::set<int> lines;
  for (const auto& entry : j.at("ranking")) lines.insert(entry.at("line_begin").get<int>());
  CHECK(lines == std::set<int>{1, 11, 12, 22});
  for (const auto& entry : j.at("ranking")) {
    double score = std::stod(entry.at("score").get<std::string>());
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
  }
}

TEST_CASE("COFL_SEED pins the experiment output") {
  fs::path corpus = temp_dir() / "corpus.json";
  cofl::write_file(corpus.string(),
                   "{\"bugs\": 2, \"seed\": 5, \"options\": 4, \"functions\": 2, \"tests\": 3}\n");
  fs::path a = temp_dir() / "eval_a.json";
  fs::path b = temp_dir() / "eval_b.json";
  std::string base = "eval --corpus " + corpus.string() + " --format json -o ";
  auto run_env = [&](const fs::path& out) {
    std::string cmd = "COFL_SEED=123 " + cli() + " " + base + out.string() + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  REQUIRE(run_env(a) == 0);
  REQUIRE(run_env(b) == 0);
  nlohmann::json ja = nlohmann::json::parse(slurp(a));
  nlohmann::json jb = nlohmann::json::parse(slurp(b));
  // Timing fields differ between runs; metrics must not.
  for (auto& row : ja.at("rows")) row.erase("wall_ms");
  for (auto& row : jb.at("rows")) row.erase("wall_ms");
  CHECK(ja == jb);
}

TEST_CASE("localize with mode baseline ranks the executed universe") {
  fs::path model = temp_dir() / "km4.model.json";
  REQUIRE(run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string()) == 0);
  fs::path out = temp_dir() / "base.json";
  REQUIRE(run("localize --model " + model.string() + " --suite " +
              testsupport::fixture("kernel_mini.suite.json") + " --traces " +
              testsupport::fixture("kernel_mini.traces.ndjson") +
              " --mode baseline --format json -o " + out.string()) == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("sds").get<int>() == 11);
}

TEST_CASE("interactions lists the SPC's pairs under a witness configuration") {
  fs::path model = temp_dir() / "km5.model.json";
  fs::path spcs = temp_dir() / "km5.spcs.json";
  REQUIRE(run("parse " + testsupport::fixture("kernel_mini.cvl") + " -o " + model.string()) == 0);
  REQUIRE(run("spc --suite " + testsupport::fixture("kernel_mini.suite.json") +
              " --format json -o " + spcs.string()) == 0);
  fs::path out = temp_dir() / "inter.json";
  REQUIRE(run("interactions --model " + model.string() + " --spc " + spcs.string() + " --suite " +
              testsupport::fixture("kernel_mini.suite.json") + " --config c2 --format json -o " +
              out.string()) == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j.size() >= 5);  // the running example has several interacting pairs
}

TEST_CASE("missing files exit 1") {
  CHECK(run("spc --suite /nonexistent/suite.json") == 1);
  CHECK(run("localize --model /nonexistent.json --suite x --traces y") == 1);
}
