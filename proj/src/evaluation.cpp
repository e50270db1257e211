#include "postprice/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "postprice/error.hpp"
#include "postprice/random.hpp"

namespace postprice {

StockDistribution::StockDistribution(int copies) : sold_(static_cast<std::size_t>(copies) + 1) {
  if (copies < 0) throw std::invalid_argument("negative stock");
  sold_[0] = 1;
}

Rational StockDistribution::in_stock() const { return Rational(1) - sold_.back(); }

void StockDistribution::offer(const Rational& success) {
  // Walk down so each entry still holds the pre-offer mass when it is read.
  const std::size_t top = sold_.size() - 1;
  for (std::size_t j = top; j-- > 0;) {
    Rational moved = sold_[j] * success;
    sold_[j] -= moved;
    sold_[j + 1] += moved;
  }
}

Rational eval_spm(const Instance& inst, const SpmSchedule& schedule) {
  validate(inst, schedule);
  StockDistribution stock(inst.copies());
  Rational revenue = 0;
  for (const auto& step : schedule.steps) {
    if (step.skip()) continue;
    const auto& buyer = inst.buyer(step.buyer);
    const Rational& success = buyer.tail(*buyer.find(*step.price));
    revenue += *step.price * success * stock.in_stock();
    stock.offer(success);
  }
  return revenue;
}

Rational eval_aspm(const Instance& inst, const AspmTree& tree) {
  validate(inst, tree);
  if (tree.root == AspmTree::kLeaf) return 0;
  const auto k_max = static_cast<std::size_t>(inst.copies());
  std::vector<std::optional<Rational>> memo(tree.nodes.size() * (k_max + 1));

  auto value = [&](auto&& self, int node, std::size_t left) -> Rational {
    if (node == AspmTree::kLeaf || left == 0) return 0;
    auto& slot = memo[static_cast<std::size_t>(node) * (k_max + 1) + left];
    if (slot) return *slot;
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    const auto& buyer = inst.buyer(n.buyer);
    const Rational& success = buyer.tail(*buyer.find(n.price));
    Rational v = success * (n.price + self(self, n.on_sale, left - 1)) +
                 (Rational(1) - success) * self(self, n.on_no_sale, left);
    slot = v;
    return v;
  };
  return value(value, tree.root, k_max);
}

SpmSchedule order_by_decreasing_price(std::span<const Offer> offers) {
  SpmSchedule schedule;
  for (const auto& o : offers) {
    if (!o.skip()) schedule.steps.push_back(o);
  }
  std::stable_sort(schedule.steps.begin(), schedule.steps.end(),
                   [](const Offer& a, const Offer& b) {
                     if (*a.price != *b.price) return *a.price > *b.price;
                     return a.buyer < b.buyer;
                   });
  return schedule;
}

AdaptivePricing adaptive_prices_for_order(const Instance& inst,
                                          std::span<const std::size_t> order) {
  return adaptive_prices_for_order(inst, order, inst.copies());
}

AdaptivePricing adaptive_prices_for_order(const Instance& inst,
                                          std::span<const std::size_t> order, int copies) {
  if (order.empty()) throw std::invalid_argument("adaptive_prices_for_order needs a non-empty order");
  if (copies < 0) throw std::invalid_argument("negative stock");
  std::vector<bool> seen(inst.num_buyers(), false);
  for (auto b : order) {
    if (b >= inst.num_buyers() || seen[b]) throw std::invalid_argument("order is not a set of buyers");
    seen[b] = true;
  }

  const std::size_t m = order.size();
  const auto kk = static_cast<std::size_t>(copies);
  // best[pos][j]: revenue of positions pos.. with j copies left.
  // choice[pos][j]: support index, or -1 to pass the buyer over.
  std::vector<std::vector<Rational>> best(m + 1, std::vector<Rational>(kk + 1));
  std::vector<std::vector<int>> choice(m, std::vector<int>(kk + 1, -1));
  for (std::size_t pos = m; pos-- > 0;) {
    const auto& buyer = inst.buyer(order[pos]);
    for (std::size_t j = 1; j <= kk; ++j) {
      // Passing over the buyer is the "price above the support" option; it
      // also wins ties because it keeps the copy.
      Rational top = best[pos + 1][j];
      int pick = -1;
      for (std::size_t s = buyer.size(); s-- > 0;) {
        const Rational& p = buyer.tail(s);
        Rational v = p * (buyer.value(s) + best[pos + 1][j - 1]) +
                     (Rational(1) - p) * best[pos + 1][j];
        if (v > top) {
          top = v;
          pick = static_cast<int>(s);
        }
      }
      best[pos][j] = top;
      choice[pos][j] = pick;
    }
  }

  AdaptivePricing result;
  result.value = best[0][kk];
  std::map<std::pair<std::size_t, std::size_t>, int> node_of;
  auto build = [&](auto&& self, std::size_t pos, std::size_t j) -> int {
    while (pos < m && j > 0 && choice[pos][j] < 0) ++pos;
    if (pos >= m || j == 0) return AspmTree::kLeaf;
    if (auto it = node_of.find({pos, j}); it != node_of.end()) return it->second;
    const int index = static_cast<int>(result.tree.nodes.size());
    node_of[{pos, j}] = index;
    const auto& buyer = inst.buyer(order[pos]);
    result.tree.nodes.push_back(
        AspmNode{order[pos], buyer.value(static_cast<std::size_t>(choice[pos][j])),
                 AspmTree::kLeaf, AspmTree::kLeaf});
    const int sale = self(self, pos + 1, j - 1);
    const int no_sale = self(self, pos + 1, j);
    result.tree.nodes[static_cast<std::size_t>(index)].on_sale = sale;
    result.tree.nodes[static_cast<std::size_t>(index)].on_no_sale = no_sale;
    return index;
  };
  result.tree.root = build(build, 0, kk);
  return result;
}

namespace {

// Cumulative masses from the top of the support, in double precision, for
// drawing values by inversion.
struct ValueSampler {
  std::vector<double> cumulative;  // cumulative[j] = P(value index >= j)

  explicit ValueSampler(const BuyerDistribution& b) : cumulative(b.size()) {
    for (std::size_t j = 0; j < b.size(); ++j) cumulative[j] = to_double(b.tail(j));
  }

  // Index of the drawn support value, or -1 for the residual mass at 0.
  int draw(Rng& rng) const {
    const double u = rng.uniform();
    int index = -1;
    for (std::size_t j = 0; j < cumulative.size(); ++j) {
      if (u < cumulative[j]) index = static_cast<int>(j);
    }
    return index;
  }
};

}  // namespace

MonteCarloEstimate monte_carlo(const Instance& inst, const Mechanism& mechanism,
                               std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte_carlo needs at least one trial");
  std::visit([&](const auto& m) { validate(inst, m); }, mechanism);

  std::vector<ValueSampler> samplers;
  for (const auto& b : inst.buyers()) samplers.emplace_back(b);

  Rng rng(seed);
  std::vector<int> drawn(inst.num_buyers());
  double sum = 0;
  double sum_sq = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < drawn.size(); ++i) drawn[i] = samplers[i].draw(rng);
    auto accepts = [&](std::size_t buyer, const Rational& price) {
      return drawn[buyer] >= static_cast<int>(*inst.buyer(buyer).find(price));
    };
    double revenue = 0;
    int left = inst.copies();
    if (const auto* schedule = std::get_if<SpmSchedule>(&mechanism)) {
      for (const auto& step : schedule->steps) {
        if (left == 0) break;
        if (step.skip()) continue;
        if (accepts(step.buyer, *step.price)) {
          revenue += to_double(*step.price);
          --left;
        }
      }
    } else {
      const auto& tree = std::get<AspmTree>(mechanism);
      int node = tree.root;
      while (node != AspmTree::kLeaf && left > 0) {
        const auto& n = tree.nodes[static_cast<std::size_t>(node)];
        if (accepts(n.buyer, n.price)) {
          revenue += to_double(n.price);
          --left;
          node = n.on_sale;
        } else {
          node = n.on_no_sale;
        }
      }
    }
    sum += revenue;
    sum_sq += revenue * revenue;
  }
  const double count = static_cast<double>(trials);
  MonteCarloEstimate estimate;
  estimate.mean = sum / count;
  if (trials > 1) {
    const double variance = std::max(0.0, (sum_sq - count * estimate.mean * estimate.mean) / (count - 1));
    estimate.std_error = std::sqrt(variance / count);
  }
  return estimate;
}

}  // namespace postprice
