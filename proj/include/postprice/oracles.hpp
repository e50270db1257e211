#pragma once

#include <cstdint>

#include "postprice/model.hpp"

namespace postprice {

struct OracleBudget {
  std::uint64_t max_enumeration = 20'000'000;  // price vectors for the SPM search
  std::uint64_t max_dp_states = 50'000'000;    // (subset, copies) pairs
};

struct SpmOptimum {
  SpmSchedule schedule;
  Rational value;
};

struct AspmOptimum {
  AspmTree tree;
  Rational value;
};

// Tries every price vector (each buyer at one support value or skipped) in
// decreasing-price order. Throws BudgetExceeded when (L+1)^n is above budget.
SpmOptimum brute_spm_opt(const Instance& inst, const OracleBudget& budget = {});

// Subset DP over (remaining buyers, copies left). The tree shares equal
// states, so it is a DAG with one node per reachable state. Throws
// BudgetExceeded when 2^n (K+1) is above budget.
AspmOptimum exact_aspm_opt(const Instance& inst, const OracleBudget& budget = {});

// exact_aspm_opt / brute_spm_opt.
Rational adaptivity_gap(const Instance& inst, const OracleBudget& budget = {});

}  // namespace postprice
