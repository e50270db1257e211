#include "postprice/ptas_aspm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "postprice/error.hpp"
#include "postprice/evaluation.hpp"

namespace postprice {

namespace {

constexpr long long kCountCeiling = 1LL << 60;

long long clamped_floor(const Rational& q) {
  if (q >= Rational(kCountCeiling)) return kCountCeiling;
  return floor_rational(q).convert_to<long long>();
}

long long clamped_ceil(const Rational& q) {
  if (q >= Rational(kCountCeiling)) return kCountCeiling;
  return ceil_rational(q).convert_to<long long>();
}

long long clamped_product(long long a, long long b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountCeiling / b) return kCountCeiling;
  return a * b;
}

long long parse_count(const std::string& key, const std::string& text) {
  const Rational q = parse_rational(text);
  if (q < 1 || floor_rational(q) != q || q > Rational(kCountCeiling)) {
    throw std::invalid_argument("override " + key + " must be a positive integer");
  }
  return q.convert_to<long long>();
}

// Segment choices shared by every slot: small units 1..small_max, then big
// units big_min..big_max.
struct SegmentChoices {
  long long small_max = 0;
  long long big_min = 0;
  long long big_max = 0;

  explicit SegmentChoices(const AspmPtasParams& p)
      : small_max(clamped_floor(p.delta / p.tau_g)),
        big_min(small_max + 1),
        big_max(clamped_floor(Rational(1) / p.tau_g)) {}

  long long count() const { return small_max + (big_max >= big_min ? big_max - big_min + 1 : 0); }

  std::pair<SegmentKind, long long> at(long long c) const {
    if (c < small_max) return {SegmentKind::kSmall, c + 1};
    return {SegmentKind::kBig, big_min + (c - small_max)};
  }
};

}  // namespace

std::string to_string(const TreeConfiguration& config) {
  std::string out;
  for (std::size_t i = 0; i < config.segments.size(); ++i) {
    const auto& s = config.segments[i];
    if (i > 0) out += ' ';
    out += s.kind == SegmentKind::kSmall ? 's' : 'b';
    out += std::to_string(s.units);
    if (s.parent >= 0) {
      out += '^';
      out += std::to_string(s.parent);
      if (s.branch_label) {
        out += '@';
        out += std::to_string(*s.branch_label);
      }
    }
  }
  return out;
}

AspmPtasParams derive_aspm_params(const Rational& epsilon, int copies, std::size_t num_buyers,
                                  const Overrides& overrides) {
  (void)num_buyers;
  if (epsilon <= 0 || epsilon >= 1) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (copies < 1) throw std::invalid_argument("copies must be at least 1");
  static const char* const kKeys[] = {"delta", "D", "H", "C_tree", "path_cap", "path_weight_cap",
                                      "tau_g", "paths_only", "max_configurations", "max_states"};
  for (const auto& [key, value] : overrides) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw std::invalid_argument("unknown override: " + key);
    }
  }
  auto given = [&](const char* key) -> const std::string* {
    auto it = overrides.find(key);
    return it == overrides.end() ? nullptr : &it->second;
  };

  AspmPtasParams p;
  p.epsilon = epsilon;
  p.copies = copies;
  p.overrides = overrides;
  const Rational k = copies;

  p.delta = given("delta") ? parse_rational(*given("delta")) : epsilon * epsilon * epsilon / (20 * k * k * k);
  if (p.delta <= 0 || p.delta >= 1) throw std::invalid_argument("delta must lie in (0, 1)");

  if (given("D")) {
    p.D = parse_count("D", *given("D"));
  } else {
    Rational power = 1;
    const Rational base = k / epsilon;
    for (int i = 0; i < copies && power < Rational(kCountCeiling); ++i) power *= base;
    p.D = clamped_ceil(power);
  }

  if (given("H")) {
    p.H = parse_rational(*given("H"));
  } else {
    const double kd = copies;
    p.H = from_double(kd * std::log(kd / to_double(epsilon)));
  }
  if (p.H < 0) throw std::invalid_argument("H must be non-negative");

  const long long per_segment = std::min(kCountCeiling, clamped_ceil(2 * p.H / p.delta) +
                                                            clamped_floor(p.H / p.delta));
  p.tree_budget = given("C_tree") ? parse_count("C_tree", *given("C_tree"))
                                  : std::max(1LL, clamped_product(p.D, per_segment));
  p.path_budget = given("path_cap") ? parse_count("path_cap", *given("path_cap"))
                                    : std::max(1LL, clamped_product(copies, per_segment));
  p.path_weight_cap = given("path_weight_cap") ? parse_rational(*given("path_weight_cap")) : k * p.H;
  if (p.path_weight_cap < 0) throw std::invalid_argument("path_weight_cap must be non-negative");

  p.tau_g = given("tau_g") ? parse_rational(*given("tau_g")) : p.delta / (20 * Rational(p.tree_budget));
  if (p.tau_g <= 0 || p.tau_g > 1) throw std::invalid_argument("tau_g must lie in (0, 1]");

  if (given("paths_only")) {
    const auto& v = *given("paths_only");
    if (v != "0" && v != "1") throw std::invalid_argument("paths_only must be 0 or 1");
    p.paths_only = v == "1";
  }
  if (given("max_configurations")) {
    p.max_configurations = static_cast<std::uint64_t>(parse_count("max_configurations", *given("max_configurations")));
  }
  if (given("max_states")) {
    p.vg_budget.max_states = static_cast<std::uint64_t>(parse_count("max_states", *given("max_states")));
  }
  return p;
}

std::vector<std::pair<int, int>> entry_ranges(const TreeConfiguration& config, int copies) {
  std::vector<std::pair<int, int>> out(config.segments.size());
  for (std::size_t i = 0; i < config.segments.size(); ++i) {
    const auto& s = config.segments[i];
    if (s.parent < 0) {
      out[i] = {copies, copies};
    } else if (s.branch_label) {
      out[i] = {*s.branch_label, *s.branch_label};
    } else {
      const auto [lo, hi] = out[static_cast<std::size_t>(s.parent)];
      out[i] = {std::max(1, lo - 1), hi};
    }
  }
  return out;
}

void validate(const TreeConfiguration& config, const AspmPtasParams& params) {
  const auto& segs = config.segments;
  if (segs.empty()) throw std::invalid_argument("empty tree configuration");
  if (static_cast<long long>(segs.size()) > params.tree_budget) {
    throw std::invalid_argument("tree configuration above C_tree segments");
  }
  if (segs[0].parent != -1 || segs[0].branch_label) throw std::invalid_argument("bad root segment");

  std::vector<std::size_t> depth(segs.size(), 1);
  std::vector<Rational> path_weight(segs.size());  // through the segment
  std::vector<std::vector<std::size_t>> children(segs.size());
  std::vector<std::size_t> stack{0};
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.units < 1) throw std::invalid_argument("segment weight must be positive");
    const Rational w = s.units * params.tau_g;
    if (s.kind == SegmentKind::kSmall && w > params.delta) {
      throw std::invalid_argument("small segment heavier than delta");
    }
    if (s.kind == SegmentKind::kBig && (w <= params.delta || w > 1)) {
      throw std::invalid_argument("big segment weight outside (delta, 1]");
    }
    path_weight[i] = w;
    if (i == 0) continue;
    if (s.parent < 0 || static_cast<std::size_t>(s.parent) >= i) {
      throw std::invalid_argument("segments are not in pre-order");
    }
    const auto parent = static_cast<std::size_t>(s.parent);
    while (!stack.empty() && stack.back() != parent) stack.pop_back();
    if (stack.empty()) throw std::invalid_argument("segments are not in pre-order");
    stack.push_back(i);
    depth[i] = depth[parent] + 1;
    if (path_weight[parent] > params.path_weight_cap) {
      throw std::invalid_argument("path above weight cap");
    }
    path_weight[i] += path_weight[parent];
    children[parent].push_back(i);
  }
  for (auto d : depth) {
    if (static_cast<long long>(d) > params.path_budget) throw std::invalid_argument("path above segment cap");
  }

  const auto ranges = entry_ranges(config, params.copies);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& kids = children[i];
    if (kids.empty()) continue;
    const int lo = std::max(1, ranges[i].first - 1);
    const int hi = ranges[i].second;
    if (!segs[kids[0]].branch_label) {
      if (kids.size() != 1) throw std::invalid_argument("a continuation must be the only child");
      continue;
    }
    if (params.paths_only) throw std::invalid_argument("branching in a path-only search");
    if (lo == hi) throw std::invalid_argument("labeled children where only one copies value is reachable");
    int last = 0;
    for (auto c : kids) {
      const auto& label = segs[c].branch_label;
      if (!label) throw std::invalid_argument("mixed labeled and unlabeled children");
      if (*label <= last || *label < lo || *label > hi) {
        throw std::invalid_argument("branch labels must increase within the reachable range");
      }
      last = *label;
    }
  }
}

namespace {

struct Slot {
  int parent = -1;
  std::optional<int> label;
  int lo = 0;
  int hi = 0;
  long long depth = 1;
  Rational path_weight;  // before this segment
};

class TreeEnumerator {
 public:
  TreeEnumerator(const AspmPtasParams& params,
                 const std::function<bool(const TreeConfiguration&)>& visit)
      : params_(params), choices_(params), visit_(visit) {}

  void run() {
    if (choices_.count() == 0) return;
    pending_.push_back(Slot{-1, std::nullopt, params_.copies, params_.copies, 1, Rational(0)});
    fill();
  }

 private:
  // Returns false once the visitor asked to stop.
  bool fill() {
    if (pending_.empty()) return visit_(tree_);
    const Slot slot = pending_.back();
    pending_.pop_back();
    const int index = static_cast<int>(tree_.segments.size());
    for (long long c = 0; c < choices_.count(); ++c) {
      const auto [kind, units] = choices_.at(c);
      tree_.segments.push_back(TreeSegment{kind, units, slot.parent, slot.label});
      if (!fill()) return false;

      const Rational through = slot.path_weight + units * params_.tau_g;
      const auto used = static_cast<long long>(tree_.segments.size() + pending_.size());
      if (slot.depth < params_.path_budget && through <= params_.path_weight_cap &&
          used < params_.tree_budget) {
        const int lo = std::max(1, slot.lo - 1);
        const int hi = slot.hi;
        pending_.push_back(Slot{index, std::nullopt, lo, hi, slot.depth + 1, through});
        if (!fill()) return false;
        pending_.pop_back();

        if (!params_.paths_only && hi > lo) {
          const int width = hi - lo + 1;
          for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << width); ++mask) {
            const int count = std::popcount(mask);
            if (used + count > params_.tree_budget) continue;
            for (int b = width - 1; b >= 0; --b) {
              if (mask >> b & 1) {
                pending_.push_back(Slot{index, lo + b, lo + b, lo + b, slot.depth + 1, through});
              }
            }
            if (!fill()) return false;
            pending_.resize(pending_.size() - static_cast<std::size_t>(count));
          }
        }
      }
      tree_.segments.pop_back();
    }
    pending_.push_back(slot);
    return true;
  }

  const AspmPtasParams& params_;
  SegmentChoices choices_;
  const std::function<bool(const TreeConfiguration&)>& visit_;
  TreeConfiguration tree_;
  std::vector<Slot> pending_;  // back() is filled next
};

}  // namespace

void for_each_tree_configuration(const AspmPtasParams& params,
                                 const std::function<bool(const TreeConfiguration&)>& visit) {
  if (params.copies > 31) throw BudgetExceeded("tree enumeration supports K <= 31");
  TreeEnumerator(params, visit).run();
}

std::uint64_t count_tree_configurations(const AspmPtasParams& params, std::uint64_t limit) {
  std::uint64_t count = 0;
  for_each_tree_configuration(params, [&](const TreeConfiguration&) { return ++count <= limit; });
  return count;
}

std::vector<TreeConfiguration> enumerate_tree_configurations(const AspmPtasParams& params) {
  if (count_tree_configurations(params, params.max_configurations) > params.max_configurations) {
    throw BudgetExceeded("more than " + std::to_string(params.max_configurations) +
                         " tree configurations; raise epsilon or override C_tree / tau_g");
  }
  std::vector<TreeConfiguration> out;
  for_each_tree_configuration(params, [&](const TreeConfiguration& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

std::vector<Rational> tree_discount_factors(const TreeConfiguration& config, const Rational& tau_g,
                                            int copies) {
  if (copies < 1) throw std::invalid_argument("copies must be at least 1");
  const auto kk = static_cast<std::size_t>(copies);
  const auto& segs = config.segments;
  // entry[i][c]: probability of entering segment i with c copies left.
  std::vector<std::vector<Rational>> entry(segs.size(), std::vector<Rational>(kk + 1));
  std::vector<Rational> factors(segs.size());
  std::vector<std::vector<Rational>> exit(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.parent < 0) {
      entry[i][kk] = 1;
    } else {
      const auto& out = exit[static_cast<std::size_t>(s.parent)];
      if (s.branch_label) {
        const auto label = static_cast<std::size_t>(*s.branch_label);
        if (label >= 1 && label <= kk) entry[i][label] = out[label];
      } else {
        for (std::size_t c = 1; c <= kk; ++c) entry[i][c] = out[c];
      }
    }
    const Rational w = s.units * tau_g;
    if (w < 0 || w > 1) throw std::invalid_argument("segment weight outside [0, 1]");
    exit[i].assign(kk + 1, Rational(0));
    for (std::size_t c = 1; c <= kk; ++c) {
      factors[i] += entry[i][c];
      exit[i][c] += entry[i][c] * (1 - w);
      exit[i][c - 1] += entry[i][c] * w;
    }
  }
  return factors;
}

VgInstance tree_config_to_versiongap(const Instance& inst, const TreeConfiguration& config,
                                     const AspmPtasParams& params,
                                     const std::vector<Rational>& factors) {
  std::vector<Segment> segments;
  std::vector<int> parent;
  for (const auto& s : config.segments) {
    segments.push_back(Segment{s.kind, s.units});
    parent.push_back(s.parent);
  }
  auto vg = segments_to_versiongap(inst, segments, params.delta, params.tau_g, factors);
  vg.family = FeasibleFamily::antichains(std::move(parent));
  return vg;
}

AspmTree assemble_tree(const VgInstance& vg, const VgAssignment& assignment,
                       const TreeConfiguration& config, const Instance& inst) {
  const auto& segs = config.segments;
  std::vector<SpmSchedule> runs(segs.size());
  {
    std::vector<std::vector<Offer>> per_bin(vg.bins.size());
    for (const auto& p : assignment.placements) {
      per_bin[p.bin].push_back(Offer{p.object, inst.buyer(p.object).value(p.version)});
    }
    for (std::size_t i = 0; i < segs.size(); ++i) runs[i] = order_by_decreasing_price(per_bin[i]);
  }
  std::vector<int> continuation(segs.size(), -1);
  std::vector<std::map<int, int>> labeled(segs.size());
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const auto parent = static_cast<std::size_t>(segs[i].parent);
    if (segs[i].branch_label) {
      labeled[parent][*segs[i].branch_label] = static_cast<int>(i);
    } else {
      continuation[parent] = static_cast<int>(i);
    }
  }

  AspmTree tree;
  std::map<std::tuple<std::size_t, std::size_t, int>, int> memo;
  auto node = [&](auto&& self, std::size_t seg, std::size_t pos, int left) -> int {
    if (left == 0) return AspmTree::kLeaf;
    if (pos == runs[seg].steps.size()) {
      if (continuation[seg] >= 0) return self(self, static_cast<std::size_t>(continuation[seg]), 0, left);
      auto it = labeled[seg].find(left);
      if (it == labeled[seg].end()) return AspmTree::kLeaf;
      return self(self, static_cast<std::size_t>(it->second), 0, left);
    }
    const auto key = std::make_tuple(seg, pos, left);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int index = static_cast<int>(tree.nodes.size());
    memo[key] = index;
    const auto& offer = runs[seg].steps[pos];
    tree.nodes.push_back(AspmNode{offer.buyer, *offer.price, AspmTree::kLeaf, AspmTree::kLeaf});
    const int sale = self(self, seg, pos + 1, left - 1);
    const int no_sale = self(self, seg, pos + 1, left);
    tree.nodes[static_cast<std::size_t>(index)].on_sale = sale;
    tree.nodes[static_cast<std::size_t>(index)].on_no_sale = no_sale;
    return index;
  };
  if (!segs.empty()) tree.root = node(node, 0, 0, inst.copies());
  return tree;
}

TreeShape tree_shape(const TreeConfiguration& config) {
  TreeShape shape;
  const auto& segs = config.segments;
  shape.segments = segs.size();
  std::vector<std::size_t> depth(segs.size(), 1);
  std::vector<bool> has_child(segs.size(), false);
  std::vector<bool> branches(segs.size(), false);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].parent >= 0) {
      const auto p = static_cast<std::size_t>(segs[i].parent);
      depth[i] = depth[p] + 1;
      has_child[p] = true;
      if (segs[i].branch_label) branches[p] = true;
    }
    shape.depth = std::max(shape.depth, depth[i]);
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!has_child[i]) ++shape.leaves;
    if (branches[i]) ++shape.branching;
  }
  return shape;
}

PtasAspmResult ptas_aspm(const Instance& inst, const Rational& epsilon, const Overrides& overrides) {
  return ptas_aspm(inst, derive_aspm_params(epsilon, inst.copies(), inst.num_buyers(), overrides));
}

PtasAspmResult ptas_aspm(const Instance& inst, const AspmPtasParams& params) {
  if (!on_probability_grid(inst)) {
    throw GridMismatch("instance probabilities are not multiples of 1/(10 n^2); discretize first");
  }
  if (params.copies != inst.copies()) throw std::invalid_argument("parameters derived for another K");
  if (count_tree_configurations(params, params.max_configurations) > params.max_configurations) {
    throw BudgetExceeded("more than " + std::to_string(params.max_configurations) +
                         " tree configurations; raise epsilon or override C_tree / tau_g");
  }
  PtasAspmResult best;
  best.value = -1;
  best.metadata.params = params;
  for_each_tree_configuration(params, [&](const TreeConfiguration& config) {
    ++best.metadata.configurations_examined;
    const auto factors = tree_discount_factors(config, params.tau_g, inst.copies());
    const auto vg = tree_config_to_versiongap(inst, config, params, factors);
    const auto solution = solve_versiongap(vg, params.vg_budget);
    auto tree = assemble_tree(vg, solution.assignment, config, inst);
    Rational value = eval_aspm(inst, tree);
    if (value > best.value) {
      best.value = std::move(value);
      best.tree = std::move(tree);
      best.metadata.best_configuration = config;
    }
    return true;
  });
  if (best.value < 0) best.value = 0;
  if (best.metadata.best_configuration) best.metadata.best_shape = tree_shape(*best.metadata.best_configuration);
  return best;
}

}  // namespace postprice
