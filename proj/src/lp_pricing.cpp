#include "postprice/lp_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "postprice/evaluation.hpp"

namespace postprice {

namespace {

// Prices of one buyer that maximize (v - tau) * tail. `low_weight` is the
// maximizer with the smallest tail (largest price), `high_weight` the one with
// the largest tail. Either may be absent when the maximum is 0: the empty
// offer then ties with the price equal to tau, if the buyer has one.
struct Maximizers {
  Rational margin;
  std::optional<std::size_t> low_weight;
  std::optional<std::size_t> high_weight;
};

Maximizers maximizers(const BuyerDistribution& b, const Rational& tau) {
  Maximizers m;
  m.margin = 0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b.value(j) < tau) continue;
    Rational r = (b.value(j) - tau) * b.tail(j);
    if (r > m.margin) {
      m.margin = r;
      m.high_weight = j;
      m.low_weight = j;
    } else if (r == m.margin && r > 0) {
      m.low_weight = j;
    }
  }
  if (m.margin == 0) {
    m.low_weight.reset();
    m.high_weight = b.find(tau);
  }
  return m;
}

Rational sales_at(const Instance& inst, const Rational& tau) {
  Rational total = 0;
  for (const auto& b : inst.buyers()) {
    auto m = maximizers(b, tau);
    if (m.low_weight) total += b.tail(*m.low_weight);
  }
  return total;
}

// Every tau at which some buyer's set of maximizers changes.
std::vector<Rational> breakpoints(const Instance& inst) {
  std::vector<Rational> out{Rational(0)};
  for (const auto& b : inst.buyers()) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out.push_back(b.value(j));
      for (std::size_t k = j + 1; k < b.size(); ++k) {
        // (v_j - t) p_j = (v_k - t) p_k, with p_j > p_k.
        Rational t = (b.value(j) * b.tail(j) - b.value(k) * b.tail(k)) / (b.tail(j) - b.tail(k));
        if (t >= 0) out.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double poisson_overflow_factor(int copies) {
  if (copies < 1) throw std::invalid_argument("copies must be at least 1");
  const double k = copies;
  return std::exp(k * std::log(k) - std::lgamma(k + 1.0) - k);
}

}  // namespace

std::vector<LagrangianChoice> lagrangian_assign(const Instance& inst, const Rational& tau) {
  if (tau < 0) throw std::invalid_argument("tau must be non-negative");
  std::vector<LagrangianChoice> out;
  out.reserve(inst.num_buyers());
  for (const auto& b : inst.buyers()) {
    auto m = maximizers(b, tau);
    out.push_back(LagrangianChoice{m.low_weight, m.margin});
  }
  return out;
}

Rational expected_sales(const Instance& inst, const std::vector<LagrangianChoice>& choices) {
  Rational total = 0;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].support_index) total += inst.buyer(i).tail(*choices[i].support_index);
  }
  return total;
}

StructuredLpSolution solve_lp(const Instance& inst) {
  const Rational copies = inst.copies();
  StructuredLpSolution sol;
  sol.buyers.resize(inst.num_buyers());

  // Smallest breakpoint whose Lagrangian assignment sells at most K. Sales are
  // non-increasing in tau and constant between breakpoints.
  const auto candidates = breakpoints(inst);
  auto first_ok = std::partition_point(candidates.begin(), candidates.end(),
                                       [&](const Rational& t) { return sales_at(inst, t) > copies; });
  // The largest support value sells nothing, so a feasible tau always exists.
  sol.tau_star = *first_ok;

  std::vector<Maximizers> at_tau;
  for (const auto& b : inst.buyers()) at_tau.push_back(maximizers(b, sol.tau_star));

  Rational sold = 0;
  for (std::size_t i = 0; i < at_tau.size(); ++i) {
    if (auto j = at_tau[i].low_weight) {
      const auto& b = inst.buyer(i);
      sol.buyers[i] = LpBuyerAssignment{b.value(*j), b.tail(*j), Rational(1), std::nullopt};
      sold += b.tail(*j);
    }
  }

  if (sol.tau_star > 0) {
    // Move buyers from their low-weight to their high-weight maximizer until
    // exactly K copies are sold in expectation. Every such mix is optimal for
    // the Lagrangian at tau*, hence for the LP. Buyers with a positive margin
    // go first so that, whenever a boundary buyer (price = tau*) exists, the
    // fractional buyer is one of them.
    std::vector<std::size_t> crossing;
    std::vector<std::size_t> boundary;
    for (std::size_t i = 0; i < at_tau.size(); ++i) {
      const auto& m = at_tau[i];
      if (!m.high_weight || m.high_weight == m.low_weight) continue;
      (m.margin > 0 ? crossing : boundary).push_back(i);
    }
    auto by_contribution = [&](std::size_t a, std::size_t c) {
      const auto& ba = inst.buyer(a);
      const auto& bc = inst.buyer(c);
      auto ja = *at_tau[a].high_weight;
      auto jc = *at_tau[c].high_weight;
      Rational ca = ba.value(ja) * ba.tail(ja);
      Rational cc = bc.value(jc) * bc.tail(jc);
      return ca != cc ? ca > cc : a < c;
    };
    std::sort(crossing.begin(), crossing.end(), by_contribution);
    std::sort(boundary.begin(), boundary.end(), by_contribution);
    std::vector<std::size_t> queue = crossing;
    queue.insert(queue.end(), boundary.begin(), boundary.end());

    for (auto i : queue) {
      Rational deficit = copies - sold;
      if (deficit <= 0) break;
      const auto& b = inst.buyer(i);
      const auto hi = *at_tau[i].high_weight;
      const auto lo = at_tau[i].low_weight;
      const Rational lo_tail = lo ? b.tail(*lo) : Rational(0);
      const Rational gain = b.tail(hi) - lo_tail;
      if (gain <= deficit) {
        sol.buyers[i] = LpBuyerAssignment{b.value(hi), b.tail(hi), Rational(1), std::nullopt};
        sold += gain;
        continue;
      }
      const Rational theta = deficit / gain;
      LpBuyerAssignment a{b.value(hi), b.tail(hi), theta, std::nullopt};
      if (lo) a.secondary = LpVersion{b.value(*lo), b.tail(*lo), Rational(1) - theta};
      sol.buyers[i] = a;
      sol.fractional_buyer = i;
      sold = copies;
      break;
    }
  }

  sol.objective = 0;
  sol.expected_sales = 0;
  for (const auto& a : sol.buyers) {
    if (!a.price) continue;
    sol.objective += *a.price * a.tail * a.fraction;
    sol.expected_sales += a.tail * a.fraction;
    if (a.secondary) {
      sol.objective += a.secondary->price * a.secondary->tail * a.secondary->fraction;
      sol.expected_sales += a.secondary->tail * a.secondary->fraction;
    }
  }
  return sol;
}

SpmSchedule build_lp_spm(const Instance& inst) { return build_lp_spm(inst, solve_lp(inst)); }

SpmSchedule build_lp_spm(const Instance& inst, const StructuredLpSolution& lp) {
  (void)inst;
  std::vector<Offer> offers;
  for (std::size_t i = 0; i < lp.buyers.size(); ++i) {
    if (lp.buyers[i].price) offers.push_back(Offer{i, lp.buyers[i].price});
  }
  SpmSchedule schedule = order_by_decreasing_price(offers);
  if (lp.fractional_buyer) {
    // Move the fractional buyer behind every other buyer with the same price.
    auto& steps = schedule.steps;
    auto it = std::find_if(steps.begin(), steps.end(),
                           [&](const Offer& o) { return o.buyer == *lp.fractional_buyer; });
    auto end = std::find_if(it, steps.end(), [&](const Offer& o) { return *o.price != *it->price; });
    std::rotate(it, it + 1, end);
  }
  return schedule;
}

double approximation_bound(int copies) { return 1.0 - poisson_overflow_factor(copies); }

double expected_min_poisson(int copies) {
  return static_cast<double>(copies) * approximation_bound(copies);
}

}  // namespace postprice
