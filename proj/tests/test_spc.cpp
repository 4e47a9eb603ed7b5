#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "cofl/spc.hpp"
#include "support.hpp"

using namespace cofl;
using testsupport::kernel_mini_suite;
using testsupport::make_suite;
using testsupport::sels;

namespace {

const SelectionSet kS1 = sels({{"PPC_16K_PAGES", false},
                               {"SLAB", true},
                               {"PPC_256K_PAGES", true},
                               {"LOCKDEP", true},
                               {"SLOB", false}});

ConfigurationSuite random_suite(std::mt19937_64& rng, int max_options = 8, int max_configs = 32) {
  while (true) {
    int options = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_options - 1));
    std::uint64_t space = std::uint64_t{1} << options;
    int configs = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                           std::min<std::uint64_t>(space, max_configs) - 1));
    std::set<std::uint64_t> chosen;
    while (static_cast<int>(chosen.size()) < configs) chosen.insert(rng() % space);
    ConfigurationSuite suite;
    int i = 0;
    bool any_fail = false;
    for (std::uint64_t bits : chosen) {
      Configuration c;
      c.id = "r" + std::to_string(i++);
      for (int o = 0; o < options; ++o)
        c.selections["O" + std::to_string(o)] = (bits >> o) & 1;
      suite.configurations.push_back(std::move(c));
      bool fail = rng() % 4 == 0;
      any_fail = any_fail || fail;
      suite.verdicts.push_back({suite.configurations.back().id, "t", !fail});
    }
    if (any_fail) return suite;
  }
}

std::vector<SelectionSet> selection_sets_of(const std::vector<SuspiciousPartialConfiguration>& spcs) {
  std::vector<SelectionSet> out;
  for (const auto& spc : spcs) out.push_back(spc.selections);
  return out;
}

}  // namespace

TEST_CASE("necessity: {SLAB=T, LOCKDEP=T} is refuted by a passing container") {
  ConditionCheck check =
      check_necessity(sels({{"SLAB", true}, {"LOCKDEP", true}}), kernel_mini_suite());
  CHECK_FALSE(check.holds);
  REQUIRE(check.counterexample.has_value());
  // c3 and c5 are the canonical passing containers; several twins qualify too.
  std::set<std::string> acceptable{"c3", "c5", "c9", "c11", "c1", "c4", "c8", "c10"};
  CHECK(acceptable.count(*check.counterexample));
}

TEST_CASE("necessity and sufficiency hold for the running example's S1") {
  CHECK(check_necessity(kS1, kernel_mini_suite()).holds);
  CHECK(check_sufficiency(kS1, kernel_mini_suite()).holds);
}

TEST_CASE("necessity is vacuously true when nothing contains the set") {
  // No configuration of the suite has PPC_16K_PAGES=T together with SLOB=T.
  CHECK(check_necessity(sels({{"PPC_16K_PAGES", true}, {"SLOB", true}}), kernel_mini_suite()).holds);
}

TEST_CASE("the empty set fails sufficiency whenever a configuration passes") {
  CHECK_FALSE(check_sufficiency(SelectionSet{}, kernel_mini_suite()).holds);
}

TEST_CASE("switch set of c2 against c1 is the PPC_16K_PAGES singleton") {
  ConfigurationSuite suite = kernel_mini_suite();
  SwitchFamily fam = switch_sets(*suite.find("c2"), suite);
  SelectionSet expected = sels({{"PPC_16K_PAGES", false}});
  CHECK(std::find(fam.minimal_switch_sets.begin(), fam.minimal_switch_sets.end(), expected) !=
        fam.minimal_switch_sets.end());
  // Theorem 1: a singleton switch set's selection is in every SPC of c2.
  for (const auto& spc : detect_spcs(suite))
    CHECK(spc.selections.contains({"PPC_16K_PAGES", false}));
}

TEST_CASE("switch sets keep only minimal pairwise differences") {
  // Four options; differences computed by brute force on a synthetic suite.
  ConfigurationSuite suite = make_suite({"A", "B", "C", "D"},
                                        {"TTTT",   // k0 fails
                                         "FTTT",   // k1 passes: diff {A}
                                         "FFTT",   // k2 passes: diff {A,B} (superset, pruned)
                                         "TTFF"},  // k3 passes: diff {C,D}
                                        {0});
  SwitchFamily fam = switch_sets(*suite.find("k0"), suite);
  std::vector<SelectionSet> expected = {
      sels({{"A", true}}), sels({{"C", true}, {"D", true}})};
  CHECK(fam.minimal_switch_sets == expected);
  CHECK(fam.delta == sels({{"A", true}, {"C", true}, {"D", true}}));
}

TEST_CASE("a failing configuration identical to a passing one cannot exist") {
  ConfigurationSuite suite = make_suite({"A"}, {"T", "T"}, {0});
  CHECK_THROWS_AS(partition_suite(suite), InputError);
}

TEST_CASE("detect_spcs finds exactly S1 on the running example") {
  std::vector<SuspiciousPartialConfiguration> spcs = detect_spcs(kernel_mini_suite());
  REQUIRE(spcs.size() == 1);
  CHECK(spcs.front().selections == kS1);
  CHECK(spcs.front().witness_failing == std::vector<std::string>{"c2", "c7"});
}

TEST_CASE("all-pass suite yields no SPCs") {
  ConfigurationSuite suite = make_suite({"A", "B"}, {"TT", "TF", "FT"}, {});
  CHECK(detect_spcs(suite).empty());
}

TEST_CASE("budget is enforced and reported") {
  // 22 differing options between one failing and one passing configuration.
  std::vector<std::string> options;
  for (int i = 0; i < 22; ++i) options.push_back("O" + std::to_string(i));
  std::string all_t(22, 'T'), all_f(22, 'F');
  ConfigurationSuite suite = make_suite(options, {all_t, all_f}, {0});
  SpcOptions opts;
  opts.budget = 1 << 10;
  CHECK_THROWS_AS(detect_spcs(suite, opts), BudgetExceeded);
}

TEST_CASE("oracle equivalence on random suites") {
  std::mt19937_64 rng(20260809);
  for (int round = 0; round < 120; ++round) {
    ConfigurationSuite suite = random_suite(rng);
    std::vector<SuspiciousPartialConfiguration> fast = detect_spcs(suite);
    std::vector<SuspiciousPartialConfiguration> slow = brute_force_spcs(suite);
    REQUIRE_MESSAGE(fast == slow, "disagreement on round " << round);
  }
}

TEST_CASE("brute force agrees with detect on the running example") {
  std::vector<SuspiciousPartialConfiguration> oracle = brute_force_spcs(kernel_mini_suite());
  REQUIRE(oracle.size() == 1);
  CHECK(oracle.front().selections == kS1);
  CHECK(oracle == detect_spcs(kernel_mini_suite()));
}

TEST_CASE("brute force refuses too many options") {
  std::vector<std::string> options;
  for (int i = 0; i < 17; ++i) options.push_back("O" + std::to_string(i));
  std::string all_t(17, 'T');
  std::string one_f = all_t;
  one_f[0] = 'F';
  ConfigurationSuite suite = make_suite(options, {all_t, one_f}, {0});
  CHECK_THROWS_AS(brute_force_spcs(suite), InputError);
}

TEST_CASE("single failing configuration with empty passing side: singletons") {
  ConfigurationSuite suite = make_suite({"A", "B", "C"}, {"TFT"}, {0});
  std::vector<SuspiciousPartialConfiguration> fast = detect_spcs(suite);
  std::vector<SuspiciousPartialConfiguration> slow = brute_force_spcs(suite);
  CHECK(fast == slow);
  REQUIRE(fast.size() == 3);
  for (const auto& spc : fast) CHECK(spc.selections.size() == 1);
}

TEST_CASE("all-fail suites agree with the oracle too") {
  ConfigurationSuite suite = make_suite({"A", "B", "C"}, {"TFT", "TTT", "FFF"}, {0, 1, 2});
  CHECK(detect_spcs(suite) == brute_force_spcs(suite));
}

TEST_CASE("every emitted SPC passes necessity, sufficiency and minimality") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 40; ++round) {
    ConfigurationSuite suite = random_suite(rng);
    for (const auto& spc : detect_spcs(suite)) {
      CHECK(check_necessity(spc.selections, suite).holds);
      CHECK(check_sufficiency(spc.selections, suite).holds);
      CHECK_NOTHROW(audit_spc(spc, suite));
      // Dropping any selection breaks the definitional pair.
      if (spc.selections.size() > 1)
        for (std::size_t i = 0; i < spc.selections.size(); ++i) {
          auto fewer = spc.selections.selections;
          fewer.erase(fewer.begin() + static_cast<long>(i));
          SelectionSet sub(std::move(fewer));
          bool still_qualifies =
              check_necessity(sub, suite).holds && check_sufficiency(sub, suite).holds;
          CHECK_FALSE(still_qualifies);
        }
    }
  }
}

TEST_CASE("Theorem 1 as executable check") {
  std::mt19937_64 rng(4242);
  for (int round = 0; round < 30; ++round) {
    ConfigurationSuite suite = random_suite(rng);
    SuitePartition part = partition_suite(suite);
    if (part.passing.empty()) continue;
    std::vector<SuspiciousPartialConfiguration> spcs = detect_spcs(suite);
    for (const std::string& cf : part.failing) {
      SwitchFamily fam = switch_sets(*suite.find(cf), suite);
      for (const auto& spc : spcs) {
        if (!spc.selections.subset_of_config(*suite.find(cf))) continue;
        for (const SelectionSet& sw : fam.minimal_switch_sets) {
          bool intersects = false;
          for (const FeatureSelection& s : sw.selections)
            if (spc.selections.contains(s)) intersects = true;
          CHECK(intersects);
        }
      }
    }
  }
}

TEST_CASE("general split property: passing containment of one side pins the other") {
  // For S containing an SPC P, split S into disjoint non-empty s1, s2: when a
  // passing configuration contains s1, s2 must intersect P.
  std::mt19937_64 rng(808);
  for (int round = 0; round < 25; ++round) {
    ConfigurationSuite suite = random_suite(rng, 6, 16);
    SuitePartition part = partition_suite(suite);
    for (const auto& spc : detect_spcs(suite)) {
      for (const std::string& w : spc.witness_failing) {
        const Configuration* c = suite.find(w);
        std::vector<FeatureSelection> all;
        for (const auto& [o, v] : c->selections) all.push_back({o, v});
        for (int split = 0; split < 20; ++split) {
          std::vector<FeatureSelection> s1, s2;
          for (const FeatureSelection& s : all) (rng() % 2 ? s1 : s2).push_back(s);
          if (s1.empty() || s2.empty()) continue;
          bool s1_in_passing = false;
          for (const Configuration& cp : suite.configurations) {
            if (!part.passing.count(cp.id)) continue;
            if (SelectionSet(std::vector<FeatureSelection>(s1)).subset_of_config(cp))
              s1_in_passing = true;
          }
          if (!s1_in_passing) continue;
          bool s2_hits_spc = false;
          for (const FeatureSelection& s : s2)
            if (spc.selections.contains(s)) s2_hits_spc = true;
          CHECK(s2_hits_spc);
        }
      }
    }
  }
}

TEST_CASE("adding a passing configuration: survivors, invalidations, new supersets") {
  std::mt19937_64 rng(1717);
  int rounds_with_new = 0;
  for (int round = 0; round < 60; ++round) {
    ConfigurationSuite suite = random_suite(rng, 6, 16);
    std::vector<SuspiciousPartialConfiguration> before = detect_spcs(suite);

    // A fresh passing configuration not already in the suite.
    int options = static_cast<int>(suite.configurations.front().selections.size());
    Configuration extra;
    extra.id = "extra";
    bool fresh = false;
    for (int tries = 0; tries < 64 && !fresh; ++tries) {
      std::uint64_t bits = rng() % (std::uint64_t{1} << options);
      for (int o = 0; o < options; ++o) extra.selections["O" + std::to_string(o)] = (bits >> o) & 1;
      fresh = true;
      for (const Configuration& c : suite.configurations)
        if (c.selections == extra.selections) fresh = false;
    }
    if (!fresh) continue;
    suite.configurations.push_back(extra);
    suite.verdicts.push_back({"extra", "t", true});
    std::vector<SuspiciousPartialConfiguration> after = detect_spcs(suite);

    auto after_sets = selection_sets_of(after);
    std::vector<SelectionSet> invalidated;
    for (const auto& old : before) {
      bool contained = old.selections.subset_of_config(extra);
      bool survives = std::find(after_sets.begin(), after_sets.end(), old.selections) !=
                      after_sets.end();
      if (contained) {
        CHECK_FALSE(survives);  // the new passing container kills it
        invalidated.push_back(old.selections);
      } else {
        CHECK(survives);  // untouched SPCs survive verbatim
      }
    }
    auto before_sets = selection_sets_of(before);
    for (const auto& now : after) {
      if (std::find(before_sets.begin(), before_sets.end(), now.selections) != before_sets.end())
        continue;
      // Genuinely new SPCs are strict supersets of an invalidated one.
      bool covers = false;
      for (const SelectionSet& dead : invalidated)
        if (dead.subset_of(now.selections) && dead.size() < now.selections.size()) covers = true;
      CHECK(covers);
      ++rounds_with_new;
    }
  }
  (void)rounds_with_new;
}

TEST_CASE("single-fault fast path matches the running example") {
  SuspiciousPartialConfiguration spc = single_fault_spc(kernel_mini_suite());
  CHECK(spc.selections == kS1);
  CHECK(spc.witness_failing == std::vector<std::string>{"c2", "c7"});
}

TEST_CASE("single-fault with CF={c}, CP={c with one flip} keeps the flipped selection") {
  ConfigurationSuite suite = make_suite({"A", "B", "C"}, {"TTT", "TFT"}, {0});
  SuspiciousPartialConfiguration spc = single_fault_spc(suite);
  CHECK(spc.selections == sels({{"B", true}}));
  CHECK(spc.selections.subset_of_config(*suite.find("k0")));
}

TEST_CASE("single-fault detects a violated single-bug assumption") {
  // Two independent bugs: A=T alone fails, B=T alone fails; the failing
  // configurations share no selection that survives revalidation.
  ConfigurationSuite suite = make_suite({"A", "B"},
                                        {"TF",   // fails (bug 1)
                                         "FT",   // fails (bug 2)
                                         "FF"},  // passes
                                        {0, 1});
  CHECK_THROWS_AS(single_fault_spc(suite), InputError);
}
