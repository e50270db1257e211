#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "postprice/model.hpp"
#include "postprice/versiongap.hpp"

namespace postprice {

// KEY=VALUE overrides; values are rational strings ("0.1", "1/8", "4").
using Overrides = std::map<std::string, std::string>;

struct PtasParams {
  Rational epsilon;
  int copies = 1;
  Rational delta;         // largest weight of a small segment
  long long segment_budget = 0;  // C
  Rational tau_g;         // weight grid
  Rational weight_cap;    // total weight before the last segment
  Overrides overrides;    // as given, echoed into metadata
  std::uint64_t max_configurations = 1'000'000;
  VgBudget vg_budget;
};

// delta = eps^3 / (20 K^3), weight_cap = K ln(K/eps),
// C = ceil(2 weight_cap / delta) + min(n, floor(weight_cap / delta)),
// tau_g = delta / (20 C). Override keys: delta, weight_cap, C, tau_g,
// max_configurations, max_states. Later quantities are derived from
// overridden earlier ones. Throws std::invalid_argument on bad input.
PtasParams derive_params(const Rational& epsilon, int copies, std::size_t num_buyers,
                         const Overrides& overrides = {});

enum class SegmentKind { kSmall, kBig };

struct Segment {
  SegmentKind kind = SegmentKind::kSmall;
  long long units = 1;  // weight units * tau_g

  friend auto operator<=>(const Segment&, const Segment&) = default;
};

struct Configuration {
  std::vector<Segment> segments;

  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

std::string to_string(const Configuration& config);

// Throws std::invalid_argument if the configuration breaks a rule of `params`.
void validate(const Configuration& config, const PtasParams& params);

// Lazily yields every valid configuration once, in lexicographic order
// (small before big, then by units; a prefix before its extensions).
class ConfigurationStream {
 public:
  explicit ConfigurationStream(const PtasParams& params);

  std::optional<Configuration> next();

 private:
  bool can_extend() const;

  long long small_max_ = 0;  // small units run 1..small_max_
  long long big_min_ = 0;    // big units run big_min_..big_max_
  long long big_max_ = 0;
  long long segment_budget_ = 0;
  Rational tau_g_;
  Rational weight_cap_;
  std::vector<long long> choice_;  // per level: 0-based index into small then big
  Rational weight_;                // total weight of the current configuration
  bool started_ = false;
  bool done_ = false;

  long long choices() const { return small_max_ + (big_max_ >= big_min_ ? big_max_ - big_min_ + 1 : 0); }
  Segment segment_at(long long choice) const;
};

// Number of configurations, counting stops at limit + 1.
std::uint64_t count_configurations(const PtasParams& params, std::uint64_t limit);

// Throws BudgetExceeded if more than params.max_configurations exist.
std::vector<Configuration> enumerate_configurations(const PtasParams& params);

// rho[l - 1][i] for l = 1..K: probability that at least l copies are left
// when segment i is reached, each segment selling one copy with probability
// equal to its weight. factors[i] = rho[0][i].
struct DiscountTable {
  std::vector<std::vector<Rational>> rho;
  std::vector<Rational> factors;
};

// Throws std::invalid_argument if a weight lies outside [0, 1].
DiscountTable discount_table(std::span<const Rational> weights, int copies);
DiscountTable segment_discount_factors(const Configuration& config, const Rational& tau_g,
                                       int copies);

// Bins for a sequence of segments, with the given discounts and the "at most
// one bin per object" family. Objects are buyers, versions their support
// prices (profit v * tail, size tail). Throws GridMismatch when the instance
// is off the 1/(10 n^2) grid.
VgInstance segments_to_versiongap(const Instance& inst, std::span<const Segment> segments,
                                  const Rational& delta, const Rational& tau_g,
                                  std::span<const Rational> discounts);

// Objects are buyers, versions their support prices (profit v * tail, size
// tail), bin i has capacity z_i * tau_g on the 1/(10 n^2) grid. Throws
// GridMismatch when the instance is off that grid.
VgInstance config_to_versiongap(const Instance& inst, const Configuration& config,
                                const PtasParams& params, const DiscountTable& factors);

// Bins in configuration order, each in decreasing price (ties by buyer).
SpmSchedule assemble_schedule(const VgInstance& vg, const VgAssignment& assignment,
                              const Instance& inst);

struct PtasSpmMetadata {
  PtasParams params;
  std::uint64_t configurations_examined = 0;
  std::optional<Configuration> best_configuration;
};

struct PtasSpmResult {
  SpmSchedule schedule;
  Rational value;  // eval_spm of `schedule`
  PtasSpmMetadata metadata;
};

// Best assembled schedule over all configurations. Ties keep the earlier
// configuration. Propagates BudgetExceeded and GridMismatch.
PtasSpmResult ptas_spm(const Instance& inst, const Rational& epsilon,
                       const Overrides& overrides = {});
PtasSpmResult ptas_spm(const Instance& inst, const PtasParams& params);

}  // namespace postprice
