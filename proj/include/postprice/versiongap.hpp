#pragma once

#include <cstdint>
#include <vector>

#include "postprice/rational.hpp"

namespace postprice {

// Generalized assignment with versions: each object is placed into a set of
// bins (one version per bin), bins discount the profit they hold, and the set
// of bins used by one object must belong to a feasible family.
//
// Sizes and capacities are integers in units of 1/M.

struct VgVersion {
  Rational profit;
  long long size_units = 0;
};

struct VgObject {
  std::vector<VgVersion> versions;
};

struct VgBin {
  long long capacity_units = 0;
  Rational discount = 1;
  // Big-buyer bins: at most one object, whose size is at least
  // `min_size_units`.
  bool single_object = false;
  long long min_size_units = 0;
};

// Bin subsets are bitmasks (bit b = bin b), so at most 32 bins.
class FeasibleFamily {
 public:
  enum class Kind { kExplicit, kAtMostOne, kAntichains };

  static FeasibleFamily explicit_subsets(std::vector<std::uint32_t> masks);
  static FeasibleFamily at_most_one();
  // Antichains of the forest given by parent indices (-1 for a root): no two
  // chosen bins on one root-to-leaf path.
  static FeasibleFamily antichains(std::vector<int> parent);

  Kind kind() const { return kind_; }
  bool contains(std::uint32_t mask) const;
  std::vector<std::uint32_t> materialize(std::size_t bins) const;

 private:
  Kind kind_ = Kind::kAtMostOne;
  std::vector<std::uint32_t> masks_;  // kExplicit, sorted
  std::vector<int> parent_;           // kAntichains
};

struct VgInstance {
  std::vector<VgObject> objects;
  std::vector<VgBin> bins;
  FeasibleFamily family = FeasibleFamily::at_most_one();
  long long granularity = 2;  // M
};

// Throws std::invalid_argument if sizes or capacities leave [0, M], the family
// lacks the empty set, there are more than 32 bins, or a discount is outside
// [0, 1].
void validate(const VgInstance& vg);

struct VgPlacement {
  std::size_t object = 0;
  std::size_t version = 0;
  std::size_t bin = 0;

  friend auto operator<=>(const VgPlacement&, const VgPlacement&) = default;
};

struct VgAssignment {
  std::vector<VgPlacement> placements;  // sorted
};

// Independent feasibility check: one version per (object, bin), bins used by
// each object in the family, capacities and single-object rules respected.
bool is_feasible(const VgInstance& vg, const VgAssignment& assignment);

Rational assignment_profit(const VgInstance& vg, const VgAssignment& assignment);

struct VgSolution {
  VgAssignment assignment;
  Rational profit;
};

struct VgBudget {
  std::uint64_t max_states = 5'000'000;
  std::uint64_t max_enumeration = 50'000'000;
};

// Dynamic program over objects with the consumed capacity of every bin as the
// state. Only reachable states are stored. Throws BudgetExceeded when the
// state count passes `budget.max_states`.
VgSolution solve_versiongap(const VgInstance& vg, const VgBudget& budget = {});

// Exhaustive search over all per-object placements; verification oracle.
VgSolution brute_versiongap(const VgInstance& vg, const VgBudget& budget = {});

}  // namespace postprice
