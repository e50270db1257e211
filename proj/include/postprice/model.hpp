#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "postprice/rational.hpp"

namespace postprice {

struct SupportPoint {
  Rational value;  // price units, > 0
  Rational mass;   // probability of exactly this value, > 0

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
};

// Discrete value distribution of one buyer. Mass not listed in the support
// sits at value 0: the buyer rejects every positive price with that
// probability.
class BuyerDistribution {
 public:
  BuyerDistribution() = default;

  // Throws MalformedInstance unless values are strictly increasing and
  // positive, masses are positive and sum to at most 1.
  explicit BuyerDistribution(std::vector<SupportPoint> support);

  const std::vector<SupportPoint>& support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  const Rational& value(std::size_t j) const { return support_[j].value; }

  // Success probability when offered the j-th support value.
  const Rational& tail(std::size_t j) const { return tails_[j]; }

  std::optional<std::size_t> find(const Rational& price) const;

  // Probability that the value is at least `price` (price > 0).
  Rational tail_probability(const Rational& price) const;

  friend bool operator==(const BuyerDistribution& a, const BuyerDistribution& b) {
    return a.support_ == b.support_;
  }

 private:
  std::vector<SupportPoint> support_;
  std::vector<Rational> tails_;
};

Rational tail_probability(const BuyerDistribution& buyer, const Rational& price);

class Instance {
 public:
  // Requires n >= 1 and K >= 1. K > n is rejected unless
  // `allow_copies_above_buyers` is set.
  Instance(std::vector<BuyerDistribution> buyers, int copies,
           bool allow_copies_above_buyers = false);

  const std::vector<BuyerDistribution>& buyers() const { return buyers_; }
  const BuyerDistribution& buyer(std::size_t i) const { return buyers_[i]; }
  std::size_t num_buyers() const { return buyers_.size(); }
  int copies() const { return copies_; }
  bool allows_copies_above_buyers() const { return allow_copies_above_buyers_; }

  // Largest support size L over all buyers.
  std::size_t max_support_size() const;

  Instance with_copies(int copies, bool allow_copies_above_buyers = false) const;

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.copies_ == b.copies_ && a.buyers_ == b.buyers_;
  }

 private:
  std::vector<BuyerDistribution> buyers_;
  int copies_;
  bool allow_copies_above_buyers_;
};

// One take-it-or-leave-it offer. An empty price is the "skip" sentinel: the
// buyer is passed over (success probability 0).
struct Offer {
  std::size_t buyer = 0;
  std::optional<Rational> price;

  bool skip() const { return !price.has_value(); }
  friend bool operator==(const Offer&, const Offer&) = default;
};

// Non-adaptive mechanism: buyers are visited in `steps` order.
struct SpmSchedule {
  std::vector<Offer> steps;
  friend bool operator==(const SpmSchedule&, const SpmSchedule&) = default;
};

// Throws InvalidMechanism on unknown buyers, repeated buyers or prices that
// are not in the buyer's support.
void validate(const Instance& inst, const SpmSchedule& schedule);

struct AspmNode {
  std::size_t buyer = 0;
  Rational price;
  int on_sale = -1;     // child index, or kLeaf
  int on_no_sale = -1;  // child index, or kLeaf

  friend bool operator==(const AspmNode&, const AspmNode&) = default;
};

// Adaptive mechanism as a binary sale/no-sale decision graph. Equal subtrees
// may be shared, so `nodes` is a DAG whose unfolding is the decision tree.
// The process stops after K sales; nodes below that depth are unreachable.
struct AspmTree {
  static constexpr int kLeaf = -1;

  std::vector<AspmNode> nodes;
  int root = kLeaf;

  friend bool operator==(const AspmTree&, const AspmTree&) = default;
};

// Throws InvalidMechanism on bad indices, cycles, off-support prices, or a
// buyer that appears twice on some root-to-leaf path.
void validate(const Instance& inst, const AspmTree& tree);

// An SPM as an ASPM whose sale and no-sale children coincide.
AspmTree path_tree(const SpmSchedule& schedule);

// Probability grid 1/(10 n^2).
long long probability_grid(std::size_t num_buyers);

// True if every tail probability is a multiple of 1/(10 n^2).
bool on_probability_grid(const Instance& inst);

// Rounds each buyer onto the value grid (powers of 1 - 1/n^2 times the largest
// value) and the probability grid (tails rounded up to 1/(10 n^2)), rescaling
// each value so that value * tail is unchanged. Buyers whose tails are already
// on the probability grid are returned unchanged, which makes the operation
// idempotent.
Instance discretize(const Instance& inst);

struct RandomInstanceOptions {
  std::size_t num_buyers = 1;
  int copies = 1;
  std::size_t max_support = 1;  // L
  long long min_value = 1;
  long long max_value = 100;
  // Every support mass is at least this many grid units of 1/(10 n^2).
  long long min_mass_units = 1;
  // Probability that a buyer leaves some mass at value 0, in percent.
  int residual_percent = 50;
};

// Deterministic in `seed`. Values are distinct integers in
// [min_value, max_value]; masses are on the 1/(10 n^2) grid so the result is a
// fixed point of discretize().
Instance random_instance(const RandomInstanceOptions& options, std::uint64_t seed);

}  // namespace postprice
