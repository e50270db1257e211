#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "postprice/model.hpp"

namespace postprice {

// Distribution of the number of copies sold so far, truncated at K: the last
// entry holds "K or more", after which the process has stopped.
class StockDistribution {
 public:
  explicit StockDistribution(int copies);

  int copies() const { return static_cast<int>(sold_.size()) - 1; }
  const Rational& sold(int j) const { return sold_[static_cast<std::size_t>(j)]; }

  // Probability that a copy is still available.
  Rational in_stock() const;

  // One buyer accepting with probability `success`.
  void offer(const Rational& success);

 private:
  std::vector<Rational> sold_;
};

// Exact expected revenue of a schedule.
Rational eval_spm(const Instance& inst, const SpmSchedule& schedule);

// Exact expected revenue of an adaptive mechanism.
Rational eval_aspm(const Instance& inst, const AspmTree& tree);

// Sorts offers by non-increasing price, ties by buyer index. Skipped buyers
// are dropped.
SpmSchedule order_by_decreasing_price(std::span<const Offer> offers);

struct AdaptivePricing {
  AspmTree tree;
  Rational value;
};

// Best prices for a fixed visiting order when the price may depend on the
// number of copies left. The tree is a path in `order` whose nodes are keyed
// by (position, copies left); skipped positions produce no node.
AdaptivePricing adaptive_prices_for_order(const Instance& inst,
                                          std::span<const std::size_t> order);
AdaptivePricing adaptive_prices_for_order(const Instance& inst,
                                          std::span<const std::size_t> order, int copies);

using Mechanism = std::variant<SpmSchedule, AspmTree>;

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
};

// Simulates `trials` independent value draws; deterministic in `seed`.
MonteCarloEstimate monte_carlo(const Instance& inst, const Mechanism& mechanism,
                               std::uint64_t trials, std::uint64_t seed);

}  // namespace postprice
