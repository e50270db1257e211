#include "postprice/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "postprice/error.hpp"
#include "postprice/random.hpp"

namespace postprice {

BuyerDistribution::BuyerDistribution(std::vector<SupportPoint> support)
    : support_(std::move(support)) {
  Rational total = 0;
  for (std::size_t j = 0; j < support_.size(); ++j) {
    const auto& p = support_[j];
    if (p.value <= 0) throw MalformedInstance("support values must be positive");
    if (p.mass <= 0) throw MalformedInstance("support masses must be positive");
    if (j > 0 && !(support_[j - 1].value < p.value)) {
      throw MalformedInstance("support values must be strictly increasing");
    }
    total += p.mass;
  }
  if (total > 1) throw MalformedInstance("support masses sum above 1");

  tails_.resize(support_.size());
  Rational acc = 0;
  for (std::size_t j = support_.size(); j-- > 0;) {
    acc += support_[j].mass;
    tails_[j] = acc;
  }
}

std::optional<std::size_t> BuyerDistribution::find(const Rational& price) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), price,
                             [](const SupportPoint& p, const Rational& v) { return p.value < v; });
  if (it == support_.end() || it->value != price) return std::nullopt;
  return static_cast<std::size_t>(it - support_.begin());
}

Rational BuyerDistribution::tail_probability(const Rational& price) const {
  if (price <= 0) throw std::invalid_argument("tail_probability needs a positive price");
  auto it = std::lower_bound(support_.begin(), support_.end(), price,
                             [](const SupportPoint& p, const Rational& v) { return p.value < v; });
  if (it == support_.end()) return Rational(0);
  return tails_[static_cast<std::size_t>(it - support_.begin())];
}

Rational tail_probability(const BuyerDistribution& buyer, const Rational& price) {
  return buyer.tail_probability(price);
}

Instance::Instance(std::vector<BuyerDistribution> buyers, int copies,
                   bool allow_copies_above_buyers)
    : buyers_(std::move(buyers)),
      copies_(copies),
      allow_copies_above_buyers_(allow_copies_above_buyers) {
  if (buyers_.empty()) throw MalformedInstance("instance needs at least one buyer");
  if (copies_ < 1) throw MalformedInstance("instance needs at least one copy");
  if (!allow_copies_above_buyers_ && static_cast<std::size_t>(copies_) > buyers_.size()) {
    throw MalformedInstance("more copies than buyers (K > n) without the explicit flag");
  }
}

std::size_t Instance::max_support_size() const {
  std::size_t l = 0;
  for (const auto& b : buyers_) l = std::max(l, b.size());
  return l;
}

Instance Instance::with_copies(int copies, bool allow_copies_above_buyers) const {
  return Instance(buyers_, copies, allow_copies_above_buyers);
}

void validate(const Instance& inst, const SpmSchedule& schedule) {
  std::vector<bool> seen(inst.num_buyers(), false);
  for (const auto& step : schedule.steps) {
    if (step.buyer >= inst.num_buyers()) {
      throw InvalidMechanism("schedule references unknown buyer " + std::to_string(step.buyer));
    }
    if (seen[step.buyer]) {
      throw InvalidMechanism("buyer " + std::to_string(step.buyer) + " appears twice");
    }
    seen[step.buyer] = true;
    if (step.price && !inst.buyer(step.buyer).find(*step.price)) {
      throw InvalidMechanism("price " + format_rational(*step.price) +
                             " is not in the support of buyer " + std::to_string(step.buyer));
    }
  }
}

void validate(const Instance& inst, const AspmTree& tree) {
  const auto count = static_cast<int>(tree.nodes.size());
  if (tree.root == AspmTree::kLeaf) return;
  if (tree.root < 0 || tree.root >= count) throw InvalidMechanism("root index out of range");
  for (const auto& node : tree.nodes) {
    if (node.buyer >= inst.num_buyers()) {
      throw InvalidMechanism("tree references unknown buyer " + std::to_string(node.buyer));
    }
    if (!inst.buyer(node.buyer).find(node.price)) {
      throw InvalidMechanism("tree price " + format_rational(node.price) +
                             " is not in the support of buyer " + std::to_string(node.buyer));
    }
    for (int child : {node.on_sale, node.on_no_sale}) {
      if (child != AspmTree::kLeaf && (child < 0 || child >= count)) {
        throw InvalidMechanism("child index out of range");
      }
    }
  }

  // Topological order of the nodes reachable from the root (Kahn).
  std::vector<char> reachable(tree.nodes.size(), 0);
  std::vector<int> stack{tree.root};
  reachable[static_cast<std::size_t>(tree.root)] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    const auto& node = tree.nodes[static_cast<std::size_t>(u)];
    for (int child : {node.on_sale, node.on_no_sale}) {
      if (child != AspmTree::kLeaf && !reachable[static_cast<std::size_t>(child)]) {
        reachable[static_cast<std::size_t>(child)] = 1;
        stack.push_back(child);
      }
    }
  }
  std::vector<int> indegree(tree.nodes.size(), 0);
  for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
    if (!reachable[u]) continue;
    const auto& node = tree.nodes[u];
    if (node.on_sale != AspmTree::kLeaf) ++indegree[static_cast<std::size_t>(node.on_sale)];
    if (node.on_no_sale != AspmTree::kLeaf && node.on_no_sale != node.on_sale) {
      ++indegree[static_cast<std::size_t>(node.on_no_sale)];
    }
  }
  std::vector<int> order;
  std::vector<int> ready{tree.root};
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    order.push_back(u);
    const auto& node = tree.nodes[static_cast<std::size_t>(u)];
    auto release = [&](int child) {
      if (child != AspmTree::kLeaf && --indegree[static_cast<std::size_t>(child)] == 0) {
        ready.push_back(child);
      }
    };
    release(node.on_sale);
    if (node.on_no_sale != node.on_sale) release(node.on_no_sale);
  }
  const auto reachable_count =
      static_cast<std::size_t>(std::count(reachable.begin(), reachable.end(), 1));
  if (order.size() != reachable_count) throw InvalidMechanism("tree contains a cycle");

  // A buyer repeats on some path iff it occurs strictly below a node that
  // already offers to it. Sets of descendant buyers, children first.
  const std::size_t words = (inst.num_buyers() + 63) / 64;
  std::vector<std::vector<std::uint64_t>> below(tree.nodes.size(),
                                                std::vector<std::uint64_t>(words, 0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto u = static_cast<std::size_t>(*it);
    const auto& node = tree.nodes[u];
    for (int child : {node.on_sale, node.on_no_sale}) {
      if (child == AspmTree::kLeaf) continue;
      const auto c = static_cast<std::size_t>(child);
      for (std::size_t w = 0; w < words; ++w) below[u][w] |= below[c][w];
      const auto b = tree.nodes[c].buyer;
      below[u][b / 64] |= std::uint64_t{1} << (b % 64);
    }
    if (below[u][node.buyer / 64] >> (node.buyer % 64) & 1) {
      throw InvalidMechanism("buyer " + std::to_string(node.buyer) +
                             " is offered twice on one path");
    }
  }
}

AspmTree path_tree(const SpmSchedule& schedule) {
  AspmTree tree;
  for (const auto& step : schedule.steps) {
    if (step.skip()) continue;
    tree.nodes.push_back(AspmNode{step.buyer, *step.price, AspmTree::kLeaf, AspmTree::kLeaf});
  }
  for (std::size_t i = 0; i + 1 < tree.nodes.size(); ++i) {
    tree.nodes[i].on_sale = static_cast<int>(i + 1);
    tree.nodes[i].on_no_sale = static_cast<int>(i + 1);
  }
  tree.root = tree.nodes.empty() ? AspmTree::kLeaf : 0;
  return tree;
}

long long probability_grid(std::size_t num_buyers) {
  const auto n = static_cast<long long>(num_buyers);
  return 10 * n * n;
}

namespace {

bool buyer_on_grid(const BuyerDistribution& b, long long grid) {
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!is_multiple_of_inverse(b.tail(j), grid)) return false;
  }
  return true;
}

// Largest grid point vmax * r^k that does not exceed v. r^k is taken in
// double precision and then treated as an exact binary fraction, so the grid
// is fixed and comparisons against it are exact.
Rational snap_down(const Rational& v, const Rational& vmax, double ratio) {
  if (v >= vmax) return vmax;
  auto grid_point = [&](long long k) { return vmax * from_double(std::pow(ratio, static_cast<double>(k))); };
  double estimate = std::log(to_double(v) / to_double(vmax)) / std::log(ratio);
  auto k = std::max<long long>(0, static_cast<long long>(std::ceil(estimate)));
  while (grid_point(k) > v) ++k;
  while (k > 0 && grid_point(k - 1) <= v) --k;
  return grid_point(k);
}

}  // namespace

bool on_probability_grid(const Instance& inst) {
  const auto grid = probability_grid(inst.num_buyers());
  return std::all_of(inst.buyers().begin(), inst.buyers().end(),
                     [&](const BuyerDistribution& b) { return buyer_on_grid(b, grid); });
}

Instance discretize(const Instance& inst) {
  const std::size_t n = inst.num_buyers();
  const long long grid = probability_grid(n);
  // With n = 1 the ratio 1 - 1/n^2 is 0 and the value grid collapses, so only
  // the probability rounding applies.
  const double ratio = 1.0 - 1.0 / static_cast<double>(n * n);
  Rational vmax = 0;
  for (const auto& b : inst.buyers()) {
    if (b.size() > 0) vmax = std::max(vmax, b.value(b.size() - 1));
  }

  std::vector<BuyerDistribution> out;
  out.reserve(n);
  for (const auto& b : inst.buyers()) {
    if (buyer_on_grid(b, grid)) {
      out.push_back(b);
      continue;
    }
    // Snap values down and merge; the merged tail is the tail at the lowest
    // original value of the group.
    std::vector<std::pair<Rational, Rational>> snapped;  // (grid value, tail)
    for (std::size_t j = 0; j < b.size(); ++j) {
      Rational g = n > 1 ? snap_down(b.value(j), vmax, ratio) : b.value(j);
      if (snapped.empty() || snapped.back().first != g) snapped.emplace_back(g, b.tail(j));
    }
    // Round tails up and rescale values to keep value * tail fixed.
    std::vector<std::pair<Rational, Rational>> points;  // (value, tail)
    for (const auto& [g, tail] : snapped) {
      Rational rounded = ceil_rational(tail * grid) / grid;
      if (rounded > 1) throw MalformedInstance("tail probability rounds above 1");
      points.emplace_back(g * tail / rounded, rounded);
    }
    // Keep the points that still form a distribution: larger value, strictly
    // smaller tail. Dominated points are dropped.
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& c) {
      return a.first != c.first ? a.first > c.first : a.second > c.second;
    });
    std::vector<std::pair<Rational, Rational>> kept;
    for (const auto& p : points) {
      if (!kept.empty() && kept.back().first == p.first) continue;
      if (!kept.empty() && p.second <= kept.back().second) continue;
      kept.push_back(p);
    }
    std::reverse(kept.begin(), kept.end());
    std::vector<SupportPoint> support;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      Rational next = j + 1 < kept.size() ? kept[j + 1].second : Rational(0);
      support.push_back(SupportPoint{kept[j].first, kept[j].second - next});
    }
    out.emplace_back(std::move(support));
  }
  return Instance(std::move(out), inst.copies(), inst.allows_copies_above_buyers());
}

Instance random_instance(const RandomInstanceOptions& options, std::uint64_t seed) {
  const auto& o = options;
  if (o.num_buyers < 1 || o.copies < 1 || o.max_support < 1) {
    throw std::invalid_argument("random_instance needs n >= 1, K >= 1, L >= 1");
  }
  if (static_cast<std::size_t>(o.copies) > o.num_buyers) {
    throw std::invalid_argument("random_instance needs n >= K");
  }
  if (o.min_value < 1 || o.max_value < o.min_value ||
      static_cast<unsigned long long>(o.max_value - o.min_value + 1) < o.max_support) {
    throw std::invalid_argument("value range too small for L distinct values");
  }
  const long long grid = probability_grid(o.num_buyers);
  if (o.min_mass_units < 1 || static_cast<long long>(o.max_support) * o.min_mass_units > grid) {
    throw std::invalid_argument("min_mass_units incompatible with L and the grid");
  }

  Rng rng(seed);
  std::vector<BuyerDistribution> buyers;
  for (std::size_t i = 0; i < o.num_buyers; ++i) {
    const auto points = rng.uniform_int(1, static_cast<long long>(o.max_support));
    std::set<long long> values;
    while (static_cast<long long>(values.size()) < points) {
      values.insert(rng.uniform_int(o.min_value, o.max_value));
    }
    const long long floor_units = points * o.min_mass_units;
    long long total = grid;
    if (rng.uniform_int(0, 99) < o.residual_percent) total = rng.uniform_int(floor_units, grid);
    // Random composition of the spare units into `points` parts.
    std::vector<long long> cuts{0, total - floor_units};
    for (long long c = 1; c < points; ++c) cuts.push_back(rng.uniform_int(0, total - floor_units));
    std::sort(cuts.begin(), cuts.end());
    std::vector<SupportPoint> support;
    auto v = values.begin();
    for (long long c = 0; c < points; ++c, ++v) {
      const long long units = o.min_mass_units + cuts[static_cast<std::size_t>(c) + 1] -
                              cuts[static_cast<std::size_t>(c)];
      support.push_back(SupportPoint{Rational(*v), Rational(units) / grid});
    }
    buyers.emplace_back(std::move(support));
  }
  return Instance(std::move(buyers), o.copies);
}

}  // namespace postprice
