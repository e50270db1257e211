#include "postprice/ptas_spm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "postprice/error.hpp"
#include "postprice/evaluation.hpp"

namespace postprice {

namespace {

// Counts above this are over any budget; clamping keeps them in range.
constexpr long long kCountCeiling = 1LL << 60;

long long clamped_floor(const Rational& q) {
  if (q >= Rational(kCountCeiling)) return kCountCeiling;
  return static_cast<long long>(floor_rational(q).convert_to<long long>());
}

long long clamped_ceil(const Rational& q) {
  if (q >= Rational(kCountCeiling)) return kCountCeiling;
  return static_cast<long long>(ceil_rational(q).convert_to<long long>());
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const Rational q = parse_rational(text);
  if (q < 1 || floor_rational(q) != q) {
    throw std::invalid_argument("override " + key + " must be a positive integer");
  }
  return q.convert_to<std::uint64_t>();
}

}  // namespace

PtasParams derive_params(const Rational& epsilon, int copies, std::size_t num_buyers,
                         const Overrides& overrides) {
  if (epsilon <= 0 || epsilon >= 1) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (copies < 1) throw std::invalid_argument("copies must be at least 1");
  static const char* const kKeys[] = {"delta", "weight_cap", "C", "tau_g", "max_configurations",
                                      "max_states"};
  for (const auto& [key, value] : overrides) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw std::invalid_argument("unknown override: " + key);
    }
  }
  auto given = [&](const char* key) -> const std::string* {
    auto it = overrides.find(key);
    return it == overrides.end() ? nullptr : &it->second;
  };

  PtasParams p;
  p.epsilon = epsilon;
  p.copies = copies;
  p.overrides = overrides;
  const Rational k = copies;

  p.delta = given("delta") ? parse_rational(*given("delta")) : epsilon * epsilon * epsilon / (20 * k * k * k);
  if (p.delta <= 0 || p.delta >= 1) throw std::invalid_argument("delta must lie in (0, 1)");

  if (given("weight_cap")) {
    p.weight_cap = parse_rational(*given("weight_cap"));
  } else {
    const double kd = copies;
    p.weight_cap = from_double(kd * std::log(kd / to_double(epsilon)));
  }
  if (p.weight_cap < 0) throw std::invalid_argument("weight_cap must be non-negative");

  if (given("C")) {
    p.segment_budget = static_cast<long long>(parse_count("C", *given("C")));
  } else {
    const long long big = std::min(static_cast<long long>(num_buyers), clamped_floor(p.weight_cap / p.delta));
    p.segment_budget = std::min(kCountCeiling, clamped_ceil(2 * p.weight_cap / p.delta) + big);
  }
  if (p.segment_budget < 1) p.segment_budget = 1;

  p.tau_g = given("tau_g") ? parse_rational(*given("tau_g")) : p.delta / (20 * Rational(p.segment_budget));
  if (p.tau_g <= 0 || p.tau_g > 1) throw std::invalid_argument("tau_g must lie in (0, 1]");

  if (given("max_configurations")) {
    p.max_configurations = parse_count("max_configurations", *given("max_configurations"));
  }
  if (given("max_states")) p.vg_budget.max_states = parse_count("max_states", *given("max_states"));
  return p;
}

std::string to_string(const Configuration& config) {
  std::string out;
  for (const auto& s : config.segments) {
    if (!out.empty()) out += '-';
    out += s.kind == SegmentKind::kSmall ? 's' : 'b';
    out += std::to_string(s.units);
  }
  return out;
}

void validate(const Configuration& config, const PtasParams& params) {
  if (config.segments.empty()) throw std::invalid_argument("empty configuration");
  if (static_cast<long long>(config.segments.size()) > params.segment_budget) {
    throw std::invalid_argument("configuration longer than C");
  }
  Rational prefix = 0;
  for (std::size_t i = 0; i < config.segments.size(); ++i) {
    const auto& s = config.segments[i];
    if (s.units < 1) throw std::invalid_argument("segment weight must be positive");
    const Rational w = s.units * params.tau_g;
    if (s.kind == SegmentKind::kSmall && w > params.delta) {
      throw std::invalid_argument("small segment heavier than delta");
    }
    if (s.kind == SegmentKind::kBig && (w <= params.delta || w > 1)) {
      throw std::invalid_argument("big segment weight outside (delta, 1]");
    }
    if (i > 0 && prefix > params.weight_cap) throw std::invalid_argument("configuration above weight cap");
    prefix += w;
  }
}

ConfigurationStream::ConfigurationStream(const PtasParams& params)
    : segment_budget_(params.segment_budget), tau_g_(params.tau_g), weight_cap_(params.weight_cap) {
  small_max_ = clamped_floor(params.delta / params.tau_g);
  big_min_ = small_max_ + 1;
  big_max_ = clamped_floor(Rational(1) / params.tau_g);
}

Segment ConfigurationStream::segment_at(long long choice) const {
  if (choice < small_max_) return Segment{SegmentKind::kSmall, choice + 1};
  return Segment{SegmentKind::kBig, big_min_ + (choice - small_max_)};
}

bool ConfigurationStream::can_extend() const {
  return static_cast<long long>(choice_.size()) < segment_budget_ && weight_ <= weight_cap_;
}

std::optional<Configuration> ConfigurationStream::next() {
  if (done_) return std::nullopt;
  auto weight_of = [&](long long choice) { return segment_at(choice).units * tau_g_; };
  bool advanced = false;
  if (!started_) {
    started_ = true;
    if (choices() > 0 && segment_budget_ >= 1) {
      choice_.push_back(0);
      weight_ = weight_of(0);
      advanced = true;
    }
  } else if (can_extend()) {
    choice_.push_back(0);
    weight_ += weight_of(0);
    advanced = true;
  } else {
    while (!choice_.empty()) {
      weight_ -= weight_of(choice_.back());
      if (++choice_.back() < choices()) {
        weight_ += weight_of(choice_.back());
        advanced = true;
        break;
      }
      choice_.pop_back();
    }
  }
  if (!advanced) {
    done_ = true;
    return std::nullopt;
  }
  Configuration c;
  c.segments.reserve(choice_.size());
  for (auto choice : choice_) c.segments.push_back(segment_at(choice));
  return c;
}

std::uint64_t count_configurations(const PtasParams& params, std::uint64_t limit) {
  ConfigurationStream stream(params);
  std::uint64_t count = 0;
  while (count <= limit && stream.next()) ++count;
  return count;
}

std::vector<Configuration> enumerate_configurations(const PtasParams& params) {
  if (count_configurations(params, params.max_configurations) > params.max_configurations) {
    throw BudgetExceeded("more than " + std::to_string(params.max_configurations) +
                         " configurations; raise epsilon or override C / tau_g");
  }
  std::vector<Configuration> out;
  ConfigurationStream stream(params);
  while (auto c = stream.next()) out.push_back(std::move(*c));
  return out;
}

DiscountTable discount_table(std::span<const Rational> weights, int copies) {
  if (copies < 1) throw std::invalid_argument("copies must be at least 1");
  const auto kk = static_cast<std::size_t>(copies);
  const std::size_t m = weights.size();
  DiscountTable t;
  t.rho.assign(kk, std::vector<Rational>(m));
  for (std::size_t l = 0; l < kk; ++l) {
    if (m > 0) t.rho[l][0] = 1;
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const Rational& s = weights[i];
    if (s < 0 || s > 1) throw std::invalid_argument("segment weight outside [0, 1]");
    for (std::size_t l = 0; l < kk; ++l) {
      const Rational above = l + 1 < kk ? t.rho[l + 1][i] : Rational(0);
      t.rho[l][i + 1] = t.rho[l][i] * (1 - s) + above * s;
    }
  }
  if (m > 0 && (weights[m - 1] < 0 || weights[m - 1] > 1)) {
    throw std::invalid_argument("segment weight outside [0, 1]");
  }
  t.factors = t.rho[0];
  return t;
}

DiscountTable segment_discount_factors(const Configuration& config, const Rational& tau_g,
                                       int copies) {
  std::vector<Rational> weights;
  for (const auto& s : config.segments) weights.push_back(s.units * tau_g);
  return discount_table(weights, copies);
}

namespace {

VgObject buyer_object(const BuyerDistribution& b, long long grid) {
  VgObject obj;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const Rational units = b.tail(j) * grid;
    obj.versions.push_back(VgVersion{b.value(j) * b.tail(j), units.convert_to<long long>()});
  }
  return obj;
}

}  // namespace

VgInstance segments_to_versiongap(const Instance& inst, std::span<const Segment> segments,
                                  const Rational& delta, const Rational& tau_g,
                                  std::span<const Rational> discounts) {
  if (!on_probability_grid(inst)) {
    throw GridMismatch("instance probabilities are not multiples of 1/(10 n^2); discretize first");
  }
  if (segments.size() > 32) throw BudgetExceeded("more than 32 segments in one configuration");
  if (discounts.size() != segments.size()) {
    throw std::invalid_argument("discount factors do not match the configuration");
  }
  const long long grid = probability_grid(inst.num_buyers());
  VgInstance vg;
  vg.granularity = grid;
  for (const auto& b : inst.buyers()) vg.objects.push_back(buyer_object(b, grid));
  const long long big_min = clamped_floor(delta * grid) + 1;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    VgBin bin;
    bin.capacity_units = std::min(grid, clamped_floor(s.units * tau_g * grid));
    bin.discount = discounts[i];
    if (s.kind == SegmentKind::kBig) {
      bin.single_object = true;
      bin.min_size_units = big_min;
    }
    vg.bins.push_back(std::move(bin));
  }
  return vg;
}

VgInstance config_to_versiongap(const Instance& inst, const Configuration& config,
                                const PtasParams& params, const DiscountTable& factors) {
  return segments_to_versiongap(inst, config.segments, params.delta, params.tau_g, factors.factors);
}

SpmSchedule assemble_schedule(const VgInstance& vg, const VgAssignment& assignment,
                              const Instance& inst) {
  std::vector<std::vector<Offer>> per_bin(vg.bins.size());
  for (const auto& p : assignment.placements) {
    per_bin[p.bin].push_back(Offer{p.object, inst.buyer(p.object).value(p.version)});
  }
  SpmSchedule schedule;
  for (const auto& offers : per_bin) {
    auto run = order_by_decreasing_price(offers);
    schedule.steps.insert(schedule.steps.end(), run.steps.begin(), run.steps.end());
  }
  return schedule;
}

PtasSpmResult ptas_spm(const Instance& inst, const Rational& epsilon, const Overrides& overrides) {
  return ptas_spm(inst, derive_params(epsilon, inst.copies(), inst.num_buyers(), overrides));
}

PtasSpmResult ptas_spm(const Instance& inst, const PtasParams& params) {
  if (!on_probability_grid(inst)) {
    throw GridMismatch("instance probabilities are not multiples of 1/(10 n^2); discretize first");
  }
  if (count_configurations(params, params.max_configurations) > params.max_configurations) {
    throw BudgetExceeded("more than " + std::to_string(params.max_configurations) +
                         " configurations; raise epsilon or override C / tau_g");
  }
  PtasSpmResult best;
  best.value = -1;
  best.metadata.params = params;
  ConfigurationStream stream(params);
  while (auto config = stream.next()) {
    ++best.metadata.configurations_examined;
    const auto factors = segment_discount_factors(*config, params.tau_g, inst.copies());
    const auto vg = config_to_versiongap(inst, *config, params, factors);
    const auto solution = solve_versiongap(vg, params.vg_budget);
    auto schedule = assemble_schedule(vg, solution.assignment, inst);
    Rational value = eval_spm(inst, schedule);
    if (value > best.value) {
      best.value = std::move(value);
      best.schedule = std::move(schedule);
      best.metadata.best_configuration = std::move(*config);
    }
  }
  if (best.value < 0) best.value = 0;
  return best;
}

}  // namespace postprice
