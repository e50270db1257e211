#include "postprice/oracles.hpp"

#include <cmath>
#include <string>

#include "postprice/error.hpp"
#include "postprice/evaluation.hpp"

namespace postprice {

SpmOptimum brute_spm_opt(const Instance& inst, const OracleBudget& budget) {
  const std::size_t n = inst.num_buyers();
  long double count = 1;
  for (const auto& b : inst.buyers()) count *= static_cast<long double>(b.size() + 1);
  if (count > static_cast<long double>(budget.max_enumeration)) {
    throw BudgetExceeded("SPM search over " + std::to_string(static_cast<double>(count)) +
                         " price vectors is above budget");
  }

  SpmOptimum best;
  best.value = -1;
  // digit[i] = 0 skips buyer i, j + 1 offers its j-th support value.
  std::vector<std::size_t> digit(n, 0);
  std::vector<Offer> offers(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      offers[i].buyer = i;
      offers[i].price.reset();
      if (digit[i] > 0) offers[i].price = inst.buyer(i).value(digit[i] - 1);
    }
    auto schedule = order_by_decreasing_price(offers);
    Rational value = eval_spm(inst, schedule);
    if (value > best.value) {
      best.value = std::move(value);
      best.schedule = std::move(schedule);
    }
    std::size_t i = 0;
    while (i < n && ++digit[i] == inst.buyer(i).size() + 1) digit[i++] = 0;
    if (i == n) break;
  }
  return best;
}

AspmOptimum exact_aspm_opt(const Instance& inst, const OracleBudget& budget) {
  const std::size_t n = inst.num_buyers();
  const auto kk = static_cast<std::size_t>(inst.copies());
  if (n > 30 || std::ldexp(static_cast<double>(kk + 1), static_cast<int>(n)) >
                    static_cast<double>(budget.max_dp_states)) {
    throw BudgetExceeded("ASPM subset DP with 2^" + std::to_string(n) + " * " +
                         std::to_string(kk + 1) + " states is above budget");
  }
  const std::size_t masks = std::size_t{1} << n;
  const std::size_t width = kk + 1;

  std::vector<std::vector<Rational>> revenue(n);  // v * tail
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = inst.buyer(i);
    for (std::size_t j = 0; j < b.size(); ++j) revenue[i].push_back(b.value(j) * b.tail(j));
  }

  // value[mask * width + k]; choice packs (buyer, support index).
  std::vector<Rational> value(masks * width);
  std::vector<std::pair<int, int>> choice(masks * width, {-1, -1});
  for (std::size_t mask = 1; mask < masks; ++mask) {
    for (std::size_t k = 1; k <= kk; ++k) {
      Rational top = -1;
      std::pair<int, int> pick{-1, -1};
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask >> i & 1)) continue;
        const std::size_t rest = mask & ~(std::size_t{1} << i);
        const Rational& sold = value[rest * width + k - 1];
        const Rational& kept = value[rest * width + k];
        const Rational diff = sold - kept;
        const auto& b = inst.buyer(i);
        for (std::size_t j = 0; j < b.size(); ++j) {
          // kept + tail * (v + sold - kept)
          Rational v = kept + revenue[i][j] + b.tail(j) * diff;
          if (v > top) {
            top = std::move(v);
            pick = {static_cast<int>(i), static_cast<int>(j)};
          }
        }
      }
      if (pick.first < 0) top = 0;
      value[mask * width + k] = std::move(top);
      choice[mask * width + k] = pick;
    }
  }

  AspmOptimum out;
  out.value = value[(masks - 1) * width + kk];
  std::vector<int> node_of(masks * width, -2);
  auto build = [&](auto&& self, std::size_t mask, std::size_t k) -> int {
    if (mask == 0 || k == 0) return AspmTree::kLeaf;
    const std::size_t state = mask * width + k;
    if (node_of[state] != -2) return node_of[state];
    const auto [i, j] = choice[state];
    if (i < 0) return node_of[state] = AspmTree::kLeaf;
    const int index = static_cast<int>(out.tree.nodes.size());
    node_of[state] = index;
    const auto buyer = static_cast<std::size_t>(i);
    out.tree.nodes.push_back(AspmNode{buyer, inst.buyer(buyer).value(static_cast<std::size_t>(j)),
                                      AspmTree::kLeaf, AspmTree::kLeaf});
    const std::size_t rest = mask & ~(std::size_t{1} << buyer);
    const int sale = self(self, rest, k - 1);
    const int no_sale = self(self, rest, k);
    out.tree.nodes[static_cast<std::size_t>(index)].on_sale = sale;
    out.tree.nodes[static_cast<std::size_t>(index)].on_no_sale = no_sale;
    return index;
  };
  out.tree.root = build(build, masks - 1, kk);
  return out;
}

Rational adaptivity_gap(const Instance& inst, const OracleBudget& budget) {
  const auto spm = brute_spm_opt(inst, budget);
  const auto aspm = exact_aspm_opt(inst, budget);
  if (spm.value == 0) return Rational(1);
  return aspm.value / spm.value;
}

}  // namespace postprice
