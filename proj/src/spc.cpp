#include "cofl/spc.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>

#include "cofl/parallel.hpp"

namespace cofl {

SelectionSet::SelectionSet(std::vector<FeatureSelection> sels) : selections(std::move(sels)) {
  std::sort(selections.begin(), selections.end());
  for (std::size_t i = 1; i < selections.size(); ++i) {
    if (selections[i].option == selections[i - 1].option) {
      if (selections[i].value != selections[i - 1].value)
        throw InputError("selection set assigns option " + selections[i].option + " twice");
      selections.erase(selections.begin() + static_cast<long>(i));
      --i;
    }
  }
}

bool SelectionSet::contains(const FeatureSelection& s) const {
  return std::binary_search(selections.begin(), selections.end(), s);
}

bool SelectionSet::subset_of(const SelectionSet& other) const {
  return std::includes(other.selections.begin(), other.selections.end(), selections.begin(),
                       selections.end());
}

bool SelectionSet::subset_of_config(const Configuration& c) const {
  for (const FeatureSelection& s : selections)
    if (!c.contains(s)) return false;
  return true;
}

std::string SelectionSet::str() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < selections.size(); ++i) {
    if (i) os << ", ";
    os << to_string(selections[i]);
  }
  os << '}';
  return os.str();
}

namespace {

// Bit-indexed view of a suite: option i corresponds to bit (1 << i).
struct SuiteIndex {
  std::vector<std::string> options;  // sorted
  std::vector<std::string> config_ids;
  std::vector<std::uint64_t> values;  // per config
  std::vector<bool> failing;          // per config
  std::uint64_t full_mask = 0;

  int option_index(const std::string& opt) const {
    auto it = std::lower_bound(options.begin(), options.end(), opt);
    if (it == options.end() || *it != opt) return -1;
    return static_cast<int>(it - options.begin());
  }
};

SuiteIndex index_suite(const ConfigurationSuite& suite) {
  suite.validate();
  SuiteIndex idx;
  std::set<std::string> opts;
  for (const Configuration& c : suite.configurations)
    for (const auto& [o, v] : c.selections) {
      (void)v;
      opts.insert(o);
    }
  idx.options.assign(opts.begin(), opts.end());
  if (idx.options.size() > 64)
    throw InputError("suites with more than 64 options are not supported");
  idx.full_mask = idx.options.size() == 64 ? ~std::uint64_t{0}
                                           : (std::uint64_t{1} << idx.options.size()) - 1;

  SuitePartition part = partition_suite(suite);
  for (const Configuration& c : suite.configurations) {
    for (const std::string& o : idx.options)
      if (!c.selections.count(o))
        throw InputError("configuration " + c.id + " does not assign option " + o);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < idx.options.size(); ++i)
      if (c.selections.at(idx.options[i])) v |= std::uint64_t{1} << i;
    idx.config_ids.push_back(c.id);
    idx.values.push_back(v);
    idx.failing.push_back(part.failing.count(c.id) != 0);
  }
  return idx;
}

struct BitSet {
  std::uint64_t mask = 0;
  std::uint64_t values = 0;  // meaningful only on mask bits

  bool contained_in(std::uint64_t config_values) const {
    return (config_values & mask) == values;
  }
  bool subset_of(const BitSet& o) const {
    return (mask & ~o.mask) == 0 && (o.values & mask) == values;
  }
};

SelectionSet to_selection_set(const SuiteIndex& idx, const BitSet& b) {
  std::vector<FeatureSelection> sels;
  for (std::size_t i = 0; i < idx.options.size(); ++i)
    if (b.mask & (std::uint64_t{1} << i))
      sels.push_back({idx.options[i], (b.values >> i) & 1 ? true : false});
  return SelectionSet(std::move(sels));
}

BitSet from_selection_set(const SuiteIndex& idx, const SelectionSet& s) {
  BitSet b;
  for (const FeatureSelection& sel : s.selections) {
    int i = idx.option_index(sel.option);
    if (i < 0) throw InputError("selection names option " + sel.option + " unknown to the suite");
    b.mask |= std::uint64_t{1} << i;
    if (sel.value) b.values |= std::uint64_t{1} << i;
  }
  return b;
}

// True iff every configuration containing b fails; equivalently, no passing
// configuration contains b. Returns the index of a violating config or -1.
int containing_passing_config(const SuiteIndex& idx, const BitSet& b) {
  for (std::size_t i = 0; i < idx.values.size(); ++i)
    if (!idx.failing[i] && b.contained_in(idx.values[i])) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> witnesses_of(const SuiteIndex& idx, const BitSet& b) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < idx.values.size(); ++i)
    if (idx.failing[i] && b.contained_in(idx.values[i])) out.push_back(idx.config_ids[i]);
  std::sort(out.begin(), out.end());
  return out;
}

// Masks of the minimal switch sets of failing config `ci` (values are taken
// from the failing config itself).
std::vector<std::uint64_t> minimal_diff_masks(const SuiteIndex& idx, std::size_t ci) {
  std::vector<std::uint64_t> diffs;
  for (std::size_t j = 0; j < idx.values.size(); ++j) {
    if (idx.failing[j]) continue;
    std::uint64_t d = (idx.values[ci] ^ idx.values[j]) & idx.full_mask;
    if (d) diffs.push_back(d);
  }
  std::sort(diffs.begin(), diffs.end());
  diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
  std::vector<std::uint64_t> minimal;
  for (std::uint64_t d : diffs) {
    bool has_subset = false;
    for (std::uint64_t m : diffs)
      if (m != d && (m & ~d) == 0) { has_subset = true; break; }
    if (!has_subset) minimal.push_back(d);
  }
  return minimal;
}

// Subset masks of `delta` in (popcount, numeric) order.
std::vector<std::uint64_t> subsets_size_ascending(std::uint64_t delta) {
  std::vector<std::uint64_t> subs;
  std::uint64_t sub = delta;
  while (true) {
    subs.push_back(sub);
    if (sub == 0) break;
    sub = (sub - 1) & delta;
  }
  std::stable_sort(subs.begin(), subs.end(), [](std::uint64_t a, std::uint64_t b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return subs;
}

std::vector<BitSet> spcs_of_failing_config(const SuiteIndex& idx, std::size_t ci,
                                           std::uint64_t budget, bool cp_nonempty) {
  std::vector<std::uint64_t> wp;
  std::uint64_t delta;
  if (cp_nonempty) {
    wp = minimal_diff_masks(idx, ci);
    delta = 0;
    for (std::uint64_t m : wp) delta |= m;
  } else {
    // No passing configuration constrains the candidates (Theorem 1 gives no
    // pruning); fall back to all selections of the failing configuration.
    delta = idx.full_mask;
  }

  int width = std::popcount(delta);
  if (width >= 63 || (std::uint64_t{1} << width) > budget)
    throw BudgetExceeded("subset enumeration over " + std::to_string(width) +
                         " switched selections exceeds the budget of " + std::to_string(budget) +
                         " candidate sets; raise it with --budget");

  std::vector<BitSet> found;
  for (std::uint64_t sub : subsets_size_ascending(delta)) {
    if (sub == 0) continue;  // a fault-causing partial configuration is non-empty
    BitSet cand{sub, idx.values[ci] & sub};
    bool dominated = false;
    for (const BitSet& f : found)
      if (f.subset_of(cand)) { dominated = true; break; }
    if (dominated) continue;
    bool hits_all = true;
    for (std::uint64_t m : wp)
      if ((sub & m) == 0) { hits_all = false; break; }
    if (!hits_all) continue;
    if (containing_passing_config(idx, cand) >= 0) continue;  // necessity/sufficiency
    found.push_back(cand);
  }
  return found;
}

}  // namespace

ConditionCheck check_necessity(const SelectionSet& s, const ConfigurationSuite& suite) {
  SuiteIndex idx = index_suite(suite);
  BitSet b = from_selection_set(idx, s);
  int violating = containing_passing_config(idx, b);
  if (violating < 0) return {true, std::nullopt};
  return {false, idx.config_ids[static_cast<std::size_t>(violating)]};
}

ConditionCheck check_sufficiency(const SelectionSet& s, const ConfigurationSuite& suite) {
  // Over a total pass/fail partition, sufficiency is the same predicate as
  // necessity; it is kept as its own operation for the counterexample framing.
  return check_necessity(s, suite);
}

SwitchFamily switch_sets(const Configuration& c, const ConfigurationSuite& suite) {
  SuiteIndex idx = index_suite(suite);
  std::size_t ci = idx.values.size();
  for (std::size_t i = 0; i < idx.config_ids.size(); ++i)
    if (idx.config_ids[i] == c.id) ci = i;
  if (ci == idx.values.size()) throw InputError("configuration " + c.id + " is not in the suite");
  if (!idx.failing[ci]) throw InputError("configuration " + c.id + " is not failing");

  SwitchFamily fam;
  fam.config = c.id;
  std::uint64_t delta = 0;
  for (std::uint64_t m : minimal_diff_masks(idx, ci)) {
    fam.minimal_switch_sets.push_back(to_selection_set(idx, BitSet{m, idx.values[ci] & m}));
    delta |= m;
  }
  std::sort(fam.minimal_switch_sets.begin(), fam.minimal_switch_sets.end(),
            [](const SelectionSet& a, const SelectionSet& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a < b;
            });
  fam.delta = to_selection_set(idx, BitSet{delta, idx.values[ci] & delta});
  return fam;
}

std::vector<SuspiciousPartialConfiguration> detect_spcs(const ConfigurationSuite& suite,
                                                        const SpcOptions& opts) {
  SuiteIndex idx = index_suite(suite);
  std::vector<std::size_t> failing_indices;
  for (std::size_t i = 0; i < idx.values.size(); ++i)
    if (idx.failing[i]) failing_indices.push_back(i);
  if (failing_indices.empty()) return {};
  bool cp_nonempty = failing_indices.size() < idx.values.size();

  std::vector<std::vector<BitSet>> per_config(failing_indices.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(failing_indices.size(), opts.jobs, [&](std::size_t k) {
    try {
      per_config[k] = spcs_of_failing_config(idx, failing_indices[k], opts.budget, cp_nonempty);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  std::vector<BitSet> all;
  for (const auto& v : per_config)
    for (const BitSet& b : v) {
      bool dup = false;
      for (const BitSet& a : all)
        if (a.mask == b.mask && a.values == b.values) { dup = true; break; }
      if (!dup) all.push_back(b);
    }
  // Global minimality sweep. Per-configuration enumeration already yields
  // globally minimal sets; this guards the invariant.
  std::vector<BitSet> minimal;
  for (const BitSet& b : all) {
    bool dominated = false;
    for (const BitSet& a : all)
      if (!(a.mask == b.mask && a.values == b.values) && a.subset_of(b)) { dominated = true; break; }
    if (!dominated) minimal.push_back(b);
  }

  std::vector<SuspiciousPartialConfiguration> out;
  for (const BitSet& b : minimal) {
    SuspiciousPartialConfiguration spc;
    spc.selections = to_selection_set(idx, b);
    spc.witness_failing = witnesses_of(idx, b);
    out.push_back(std::move(spc));
  }
  std::sort(out.begin(), out.end(),
            [](const SuspiciousPartialConfiguration& a, const SuspiciousPartialConfiguration& b) {
              if (a.selections.size() != b.selections.size())
                return a.selections.size() < b.selections.size();
              return a.selections < b.selections;
            });
  for (const auto& spc : out) audit_spc(spc, suite);
  return out;
}

std::vector<SuspiciousPartialConfiguration> brute_force_spcs(const ConfigurationSuite& suite,
                                                             int option_cap) {
  SuiteIndex idx = index_suite(suite);
  if (static_cast<int>(idx.options.size()) > option_cap)
    throw InputError("brute-force oracle refuses suites with more than " +
                     std::to_string(option_cap) + " options");

  std::vector<BitSet> satisfying;
  // Every consistent selection set: choose a mask, then values on the mask.
  for (std::uint64_t mask = idx.full_mask;; mask = (mask - 1) & idx.full_mask) {
    if (mask != 0) {
      for (std::uint64_t values = mask;; values = (values - 1) & mask) {
        BitSet b{mask, values};
        bool witnessed = false;
        for (std::size_t i = 0; i < idx.values.size(); ++i)
          if (idx.failing[i] && b.contained_in(idx.values[i])) { witnessed = true; break; }
        if (witnessed && containing_passing_config(idx, b) < 0) satisfying.push_back(b);
        if (values == 0) break;
      }
    }
    if (mask == 0) break;
  }

  std::vector<SuspiciousPartialConfiguration> out;
  for (const BitSet& b : satisfying) {
    bool minimal = true;
    for (const BitSet& a : satisfying)
      if (!(a.mask == b.mask && a.values == b.values) && a.subset_of(b)) { minimal = false; break; }
    if (!minimal) continue;
    SuspiciousPartialConfiguration spc;
    spc.selections = to_selection_set(idx, b);
    spc.witness_failing = witnesses_of(idx, b);
    out.push_back(std::move(spc));
  }
  std::sort(out.begin(), out.end(),
            [](const SuspiciousPartialConfiguration& a, const SuspiciousPartialConfiguration& b) {
              if (a.selections.size() != b.selections.size())
                return a.selections.size() < b.selections.size();
              return a.selections < b.selections;
            });
  return out;
}

SuspiciousPartialConfiguration single_fault_spc(const ConfigurationSuite& suite) {
  SuiteIndex idx = index_suite(suite);
  std::vector<std::size_t> cf;
  for (std::size_t i = 0; i < idx.values.size(); ++i)
    if (idx.failing[i]) cf.push_back(i);
  if (cf.empty()) throw InputError("single-fault detection needs at least one failing configuration");

  // Selections common to all failing configurations.
  std::uint64_t agree = idx.full_mask;
  for (std::size_t i : cf) agree &= ~(idx.values[i] ^ idx.values[cf[0]]) & idx.full_mask;
  if (agree == 0)
    throw InputError("no common selections across failing configurations; "
                     "single-bug assumption violated");
  std::uint64_t common_values = idx.values[cf[0]] & agree;

  // Keep a selection when switching it alone in some failing configuration
  // yields an available passing configuration.
  std::uint64_t kept = 0;
  for (int bit = 0; bit < 64; ++bit) {
    std::uint64_t m = std::uint64_t{1} << bit;
    if (!(agree & m)) continue;
    bool confirmed = false;
    for (std::size_t i : cf) {
      std::uint64_t flipped = idx.values[i] ^ m;
      for (std::size_t j = 0; j < idx.values.size(); ++j)
        if (!idx.failing[j] && idx.values[j] == flipped) { confirmed = true; break; }
      if (confirmed) break;
    }
    if (confirmed) kept |= m;
  }
  if (kept == 0)
    throw InputError("no common selection is confirmed by a single-switch passing "
                     "configuration; single-bug assumption violated");

  BitSet b{kept, common_values & kept};
  if (containing_passing_config(idx, b) >= 0)
    throw InputError("single-fault candidate " + to_selection_set(idx, b).str() +
                     " fails necessity/sufficiency; single-bug assumption violated");
  SuspiciousPartialConfiguration spc;
  spc.selections = to_selection_set(idx, b);
  spc.witness_failing = witnesses_of(idx, b);
  audit_spc(spc, suite);
  return spc;
}

void audit_spc(const SuspiciousPartialConfiguration& spc, const ConfigurationSuite& suite) {
  if (spc.selections.empty())
    throw std::logic_error("SPC audit: empty selection set");
  if (!check_necessity(spc.selections, suite).holds)
    throw std::logic_error("SPC audit: necessity violated for " + spc.selections.str());
  if (!check_sufficiency(spc.selections, suite).holds)
    throw std::logic_error("SPC audit: sufficiency violated for " + spc.selections.str());

  SuitePartition part = partition_suite(suite);
  std::vector<std::string> expected_witnesses;
  for (const Configuration& c : suite.configurations)
    if (part.failing.count(c.id) && spc.selections.subset_of_config(c))
      expected_witnesses.push_back(c.id);
  std::sort(expected_witnesses.begin(), expected_witnesses.end());
  if (expected_witnesses.empty())
    throw std::logic_error("SPC audit: no failing witness for " + spc.selections.str());
  if (!spc.witness_failing.empty() && spc.witness_failing != expected_witnesses)
    throw std::logic_error("SPC audit: stale witness list for " + spc.selections.str());

  // Minimality over non-empty proper subsets: dropping any one selection must
  // break necessity/sufficiency (the dropped set stays witnessed, so the
  // check cannot pass vacuously).
  for (std::size_t i = 0; i < spc.selections.size(); ++i) {
    if (spc.selections.size() == 1) break;
    std::vector<FeatureSelection> fewer = spc.selections.selections;
    fewer.erase(fewer.begin() + static_cast<long>(i));
    SelectionSet sub(std::move(fewer));
    if (check_necessity(sub, suite).holds && check_sufficiency(sub, suite).holds)
      throw std::logic_error("SPC audit: " + spc.selections.str() +
                             " is not minimal (subset " + sub.str() + " already qualifies)");
  }
}

}  // namespace cofl
