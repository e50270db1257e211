#pragma once

#include <optional>
#include <vector>

#include "postprice/model.hpp"

namespace postprice {

// Per-buyer solution of the relaxation with the K-copies constraint priced at
// tau: the support value maximizing (v - tau) * tail, if that maximum is
// positive. Ties go to the larger value.
struct LagrangianChoice {
  std::optional<std::size_t> support_index;
  Rational marginal;  // max (v - tau) * tail, 0 when absent
};

std::vector<LagrangianChoice> lagrangian_assign(const Instance& inst, const Rational& tau);

// Total success probability of a Lagrangian assignment.
Rational expected_sales(const Instance& inst, const std::vector<LagrangianChoice>& choices);

struct LpVersion {
  Rational price;
  Rational tail;
  Rational fraction;
};

struct LpBuyerAssignment {
  std::optional<Rational> price;  // v(i); empty when the buyer is not used
  Rational tail;                  // success probability at `price`
  Rational fraction;              // x_i in (0, 1]
  // Only for the fractional buyer when tau* sits where two of its prices
  // tie with a positive margin: the LP optimum then mixes both. `price` is
  // the higher-probability one.
  std::optional<LpVersion> secondary;
};

struct StructuredLpSolution {
  std::vector<LpBuyerAssignment> buyers;
  Rational tau_star;
  Rational objective;       // sum of v * tail * x
  Rational expected_sales;  // sum of tail * x
  std::optional<std::size_t> fractional_buyer;
};

// Exact optimum of the revenue LP (an upper bound on every adaptive
// mechanism), found by breakpoint search over tau.
StructuredLpSolution solve_lp(const Instance& inst);

// Buyers at their LP prices in decreasing price order; the fractional buyer
// is posted with certainty and goes last among equal prices.
SpmSchedule build_lp_spm(const Instance& inst);
SpmSchedule build_lp_spm(const Instance& inst, const StructuredLpSolution& lp);

// 1 - K^K / (K! e^K). Throws std::invalid_argument for K < 1.
double approximation_bound(int copies);

// E[min(P, K)] for P ~ Poisson(K), which equals K * approximation_bound(K).
double expected_min_poisson(int copies);

}  // namespace postprice
