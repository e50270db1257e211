#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "postprice/model.hpp"
#include "postprice/ptas_spm.hpp"
#include "postprice/versiongap.hpp"

namespace postprice {

// A segment of a tree configuration. Children of one segment are either a
// single unlabeled continuation, which receives every copies-left value, or
// a set of children labeled by the number of copies left when the parent
// segment ends. Mass with no matching child stops.
struct TreeSegment {
  SegmentKind kind = SegmentKind::kSmall;
  long long units = 1;
  int parent = -1;                  // -1 for the root
  std::optional<int> branch_label;  // copies left; empty for a continuation

  friend auto operator<=>(const TreeSegment&, const TreeSegment&) = default;
};

// Segments in pre-order, siblings by increasing label.
struct TreeConfiguration {
  std::vector<TreeSegment> segments;

  friend auto operator<=>(const TreeConfiguration&, const TreeConfiguration&) = default;
};

std::string to_string(const TreeConfiguration& config);

struct AspmPtasParams {
  Rational epsilon;
  int copies = 1;
  Rational delta;
  long long D = 0;             // non-branching segment count bound
  Rational H;                  // per non-branching segment weight bound
  long long tree_budget = 0;   // C_tree, total segments
  long long path_budget = 0;   // segments on one root-to-leaf path
  Rational path_weight_cap;    // weight on a path before its last segment
  Rational tau_g;
  bool paths_only = false;
  Overrides overrides;
  std::uint64_t max_configurations = 1'000'000;
  VgBudget vg_budget;
};

// Defaults: delta = eps^3/(20 K^3), D = ceil((K/eps)^K), H = K ln(K/eps),
// S = ceil(2H/delta) + floor(H/delta), C_tree = D S, path_budget = K S,
// path_weight_cap = K H, tau_g = delta / (20 C_tree).
// Override keys: delta, D, H, C_tree, path_cap, path_weight_cap, tau_g,
// paths_only (0 or 1), max_configurations, max_states.
AspmPtasParams derive_aspm_params(const Rational& epsilon, int copies, std::size_t num_buyers,
                                  const Overrides& overrides = {});

// Copies-left range [lo, hi] with which each segment can be entered when
// every segment sells at most one copy.
std::vector<std::pair<int, int>> entry_ranges(const TreeConfiguration& config, int copies);

// Throws std::invalid_argument if the tree breaks a rule of `params`.
void validate(const TreeConfiguration& config, const AspmPtasParams& params);

// Calls `visit` on every valid tree configuration once, in a fixed order; a
// configuration's prefix in pre-order comes first. Stops when `visit`
// returns false.
void for_each_tree_configuration(const AspmPtasParams& params,
                                 const std::function<bool(const TreeConfiguration&)>& visit);

// Counting stops at limit + 1.
std::uint64_t count_tree_configurations(const AspmPtasParams& params, std::uint64_t limit);

// Throws BudgetExceeded above params.max_configurations.
std::vector<TreeConfiguration> enumerate_tree_configurations(const AspmPtasParams& params);

// Probability of reaching each segment with at least one copy left, each
// segment selling one copy with probability equal to its weight.
std::vector<Rational> tree_discount_factors(const TreeConfiguration& config, const Rational& tau_g,
                                            int copies);

// As config_to_versiongap, with the antichains of the tree as the family.
VgInstance tree_config_to_versiongap(const Instance& inst, const TreeConfiguration& config,
                                     const AspmPtasParams& params,
                                     const std::vector<Rational>& factors);

// Each segment becomes a decreasing-price run; at the end of a run the
// process moves to the continuation or to the child labeled with the copies
// left, and stops if there is none.
AspmTree assemble_tree(const VgInstance& vg, const VgAssignment& assignment,
                       const TreeConfiguration& config, const Instance& inst);

struct TreeShape {
  std::size_t segments = 0;
  std::size_t depth = 0;
  std::size_t branching = 0;  // segments with labeled children
  std::size_t leaves = 0;
};

TreeShape tree_shape(const TreeConfiguration& config);

struct PtasAspmMetadata {
  AspmPtasParams params;
  std::uint64_t configurations_examined = 0;
  std::optional<TreeConfiguration> best_configuration;
  TreeShape best_shape;
};

struct PtasAspmResult {
  AspmTree tree;
  Rational value;  // eval_aspm of `tree`
  PtasAspmMetadata metadata;
};

PtasAspmResult ptas_aspm(const Instance& inst, const Rational& epsilon,
                         const Overrides& overrides = {});
PtasAspmResult ptas_aspm(const Instance& inst, const AspmPtasParams& params);

}  // namespace postprice
