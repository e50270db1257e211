#include <doctest.h>

#include <set>

#include "postprice/error.hpp"
#include "postprice/evaluation.hpp"
#include "postprice/lp_pricing.hpp"
#include "postprice/oracles.hpp"
#include "postprice/ptas_spm.hpp"
#include "postprice/random.hpp"
#include "test_support.hpp"

using namespace postprice;
using testing_support::all_big_instance;
using testing_support::buyer;
using testing_support::q;

namespace {

// All configurations from the rules, generated without the stream.
std::vector<Configuration> configurations_by_rules(const PtasParams& p) {
  std::vector<Segment> options;
  for (long long u = 1; u * p.tau_g <= 1; ++u) {
    options.push_back(Segment{u * p.tau_g <= p.delta ? SegmentKind::kSmall : SegmentKind::kBig, u});
  }
  std::vector<Configuration> out;
  Configuration current;
  auto rec = [&](auto&& self, const Rational& weight) -> void {
    if (!current.segments.empty()) out.push_back(current);
    if (static_cast<long long>(current.segments.size()) >= p.segment_budget) return;
    if (!current.segments.empty() && weight > p.weight_cap) return;
    for (const auto& s : options) {
      current.segments.push_back(s);
      self(self, weight + s.units * p.tau_g);
      current.segments.pop_back();
    }
  };
  rec(rec, Rational(0));
  return out;
}

Overrides small_overrides(std::size_t n) {
  return {{"tau_g", "1/5"}, {"C", std::to_string(n)}};
}

}  // namespace

TEST_CASE("default parameters") {
  const auto p = derive_params(q(1, 2), 1, 3);
  CHECK(p.delta == q(625, 100000));  // 0.00625
  CHECK(to_double(p.weight_cap) == doctest::Approx(std::log(2.0)));
  const long long expected_c = static_cast<long long>(std::ceil(2 * std::log(2.0) / 0.00625)) + 3;
  CHECK(p.segment_budget == expected_c);
  CHECK(p.tau_g == p.delta / (20 * Rational(expected_c)));
  CHECK(count_configurations(p, 1000) == 1001);

  const auto o = derive_params(q(1, 2), 2, 4, {{"delta", "1/10"}, {"C", "3"}, {"tau_g", "1/20"}});
  CHECK(o.delta == q(1, 10));
  CHECK(o.segment_budget == 3);
  CHECK(o.tau_g == q(1, 20));
  CHECK(o.overrides.size() == 3);
  CHECK_THROWS_AS(derive_params(q(1, 2), 1, 2, {{"bogus", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(derive_params(q(1), 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(derive_params(q(1, 2), 1, 2, {{"tau_g", "0"}}), std::invalid_argument);
}

TEST_CASE("configuration stream matches the rules exactly and in order") {
  const std::vector<Overrides> cases{
      {{"delta", "1/4"}, {"tau_g", "1/8"}, {"C", "3"}, {"weight_cap", "1/2"}},
      {{"delta", "1/10"}, {"tau_g", "1/5"}, {"C", "4"}, {"weight_cap", "1"}},
      {{"delta", "1/2"}, {"tau_g", "1/6"}, {"C", "2"}, {"weight_cap", "0"}},
      {{"tau_g", "1/3"}, {"C", "5"}},
  };
  for (const auto& o : cases) {
    const auto p = derive_params(q(1, 2), 2, 5, o);
    auto expected = configurations_by_rules(p);
    const auto got = enumerate_configurations(p);
    CHECK(std::is_sorted(got.begin(), got.end()));
    CHECK(std::set<Configuration>(got.begin(), got.end()).size() == got.size());
    std::sort(expected.begin(), expected.end());
    CHECK(got == expected);
    CHECK(count_configurations(p, 1'000'000) == got.size());
    for (const auto& c : got) CHECK_NOTHROW(validate(c, p));
  }
}

TEST_CASE("validate rejects configurations outside the rules") {
  const auto p = derive_params(q(1, 2), 1, 3, {{"delta", "1/4"}, {"tau_g", "1/8"}, {"C", "2"}, {"weight_cap", "1/2"}});
  CHECK_THROWS_AS(validate(Configuration{}, p), std::invalid_argument);
  CHECK_THROWS_AS(validate(Configuration{{{SegmentKind::kSmall, 3}}}, p), std::invalid_argument);
  CHECK_THROWS_AS(validate(Configuration{{{SegmentKind::kBig, 2}}}, p), std::invalid_argument);
  CHECK_THROWS_AS(validate(Configuration{{{SegmentKind::kBig, 9}}}, p), std::invalid_argument);
  CHECK_THROWS_AS(validate(Configuration{{{SegmentKind::kBig, 5}, {SegmentKind::kSmall, 1}}}, p), std::invalid_argument);
  CHECK_THROWS_AS(validate(Configuration{{{SegmentKind::kSmall, 1}, {SegmentKind::kSmall, 1}, {SegmentKind::kSmall, 1}}}, p),
                  std::invalid_argument);
  CHECK_NOTHROW(validate(Configuration{{{SegmentKind::kBig, 4}, {SegmentKind::kBig, 8}}}, p));
  CHECK(to_string(Configuration{{{SegmentKind::kSmall, 3}, {SegmentKind::kBig, 5}}}) == "s3-b5");
}

TEST_CASE("enumeration budget") {
  const auto p = derive_params(q(1, 2), 1, 3, {{"max_configurations", "10"}});
  CHECK(count_configurations(p, 10) == 11);
  CHECK_THROWS_AS(enumerate_configurations(p), BudgetExceeded);
}

TEST_CASE("discount factors") {
  const std::vector<Rational> single{q(1, 2)};
  CHECK(discount_table(single, 1).factors == std::vector<Rational>{1});

  const std::vector<Rational> two{q(1, 2), q(1, 3)};
  CHECK(discount_table(two, 1).factors[1] == q(1, 2));

  const std::vector<Rational> three{q(1, 2), q(1, 2), q(1, 5)};
  const auto t = discount_table(three, 2);
  CHECK(t.factors[2] == q(3, 4));
  CHECK(t.rho[1][2] == q(1, 4));
  CHECK(t.rho[0][0] == 1);
  CHECK(t.rho[1][0] == 1);

  const std::vector<Rational> bad{q(1, 2), q(3, 2)};
  CHECK_THROWS_AS(discount_table(bad, 1), std::invalid_argument);
}

TEST_CASE("discount table rows are monotone and bounded") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Rational> w;
    const auto m = rng.uniform_int(1, 7);
    for (long long i = 0; i < m; ++i) w.push_back(q(rng.uniform_int(0, 10), 10));
    const int k = static_cast<int>(rng.uniform_int(1, 4));
    const auto t = discount_table(w, k);
    for (std::size_t l = 0; l < t.rho.size(); ++l) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(t.rho[l][i] >= 0);
        CHECK(t.rho[l][i] <= 1);
        if (i > 0) CHECK(t.rho[l][i] <= t.rho[l][i - 1]);
        if (l > 0) CHECK(t.rho[l][i] <= t.rho[l - 1][i]);
      }
    }
    // A heavier earlier segment never raises a later factor.
    if (w.size() >= 2 && w[0] < 1) {
      auto heavier = w;
      heavier[0] += q(1, 10);
      const auto h = discount_table(heavier, k);
      for (std::size_t i = 1; i < w.size(); ++i) CHECK(h.factors[i] <= t.factors[i]);
    }
  }
}

TEST_CASE("discount factors match sale probabilities of independent Bernoulli trials") {
  // Reach probability of segment i = P(fewer than K sales among earlier
  // segments), computed by enumerating outcomes.
  const std::vector<Rational> w{q(1, 3), q(1, 2), q(1, 4), q(2, 3), q(1, 5)};
  for (int k = 1; k <= 3; ++k) {
    const auto t = discount_table(w, k);
    for (std::size_t i = 0; i < w.size(); ++i) {
      Rational reach = 0;
      for (unsigned mask = 0; mask < (1u << i); ++mask) {
        Rational p = 1;
        int sales = 0;
        for (std::size_t j = 0; j < i; ++j) {
          const bool sold = mask >> j & 1;
          p *= sold ? w[j] : 1 - w[j];
          sales += sold;
        }
        if (sales < k) reach += p;
      }
      CHECK(t.factors[i] == reach);
    }
  }
}

TEST_CASE("VersionGAP construction") {
  // n = 2 so M = 40.
  const Instance inst({buyer({{q(3), q(1, 4)}, {q(5), q(1, 8)}}), buyer({{q(2), q(1, 2)}})}, 1);
  const auto p = derive_params(q(1, 2), 1, 2, {{"delta", "1/10"}, {"tau_g", "1/20"}, {"C", "3"}});
  const Configuration c{{{SegmentKind::kSmall, 1}, {SegmentKind::kBig, 8}}};
  const auto factors = segment_discount_factors(c, p.tau_g, 1);
  const auto vg = config_to_versiongap(inst, c, p, factors);
  CHECK_NOTHROW(validate(vg));
  CHECK(vg.granularity == 40);
  REQUIRE(vg.objects.size() == 2);
  CHECK(vg.objects[0].versions[0].size_units == 15);  // tail 3/8
  CHECK(vg.objects[0].versions[0].profit == q(9, 8));
  CHECK(vg.objects[0].versions[1].size_units == 5);
  CHECK(vg.objects[1].versions[0].size_units == 20);
  REQUIRE(vg.bins.size() == 2);
  CHECK(vg.bins[0].capacity_units == 2);
  CHECK(vg.bins[1].capacity_units == 16);
  CHECK(vg.bins[0].discount == 1);
  CHECK(vg.bins[1].discount == q(19, 20));
  CHECK_FALSE(vg.bins[0].single_object);
  CHECK(vg.bins[1].single_object);
  CHECK(vg.bins[1].min_size_units == 5);
  CHECK(vg.family.kind() == FeasibleFamily::Kind::kAtMostOne);

  const Instance off({buyer({{q(1), q(1, 3)}}), buyer({{q(1), q(1, 2)}})}, 1);
  CHECK_THROWS_AS(config_to_versiongap(off, c, p, factors), GridMismatch);
}

TEST_CASE("one buyer with one small segment") {
  const Instance inst({buyer({{q(2), q(1, 10)}})}, 1);
  const auto p = derive_params(q(1, 2), 1, 1, {{"delta", "1/5"}, {"tau_g", "1/10"}, {"C", "1"}});
  const Configuration c{{{SegmentKind::kSmall, 1}}};
  const auto vg = config_to_versiongap(inst, c, p, segment_discount_factors(c, p.tau_g, 1));
  CHECK(vg.objects.size() == 1);
  CHECK(vg.bins.size() == 1);
  CHECK(vg.bins[0].discount == 1);
}

TEST_CASE("single buyer gets its revenue-maximizing price") {
  const Instance inst({buyer({{q(1), q(1, 2)}, {q(3), q(1, 5)}, {q(4), q(1, 10)}})}, 1);
  const auto r = ptas_spm(inst, q(1, 2), {{"tau_g", "1/10"}, {"C", "1"}});
  Rational best = 0;
  Rational best_price = 0;
  for (std::size_t j = 0; j < inst.buyer(0).size(); ++j) {
    const Rational revenue = inst.buyer(0).value(j) * inst.buyer(0).tail(j);
    if (revenue > best) {
      best = revenue;
      best_price = inst.buyer(0).value(j);
    }
  }
  CHECK(r.value == best);
  REQUIRE(r.schedule.steps.size() == 1);
  CHECK(*r.schedule.steps[0].price == best_price);
  CHECK(r.value == eval_spm(inst, r.schedule));
}

TEST_CASE("all-big instances stay within (1 - eps) of the optimum") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const int k = static_cast<int>(rng.uniform_int(1, 2));
    const auto inst = all_big_instance(rng, n, k, 2);
    const auto r = ptas_spm(inst, q(1, 2), small_overrides(n));
    const auto opt = brute_spm_opt(inst).value;
    CHECK(r.value == eval_spm(inst, r.schedule));
    CHECK(r.value <= opt);
    CHECK(r.value >= q(1, 2) * opt);
    CHECK(r.value <= solve_lp(inst).objective);
    CHECK_NOTHROW(validate(inst, r.schedule));
    CHECK(r.metadata.configurations_examined > 0);
    CHECK(r.metadata.best_configuration.has_value());
  }
}

TEST_CASE("assembled schedules respect bin capacities") {
  Rng rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const auto inst = all_big_instance(rng, n, 1, 2);
    const auto p = derive_params(q(1, 2), 1, n, small_overrides(n));
    for (const auto& c : enumerate_configurations(p)) {
      const auto vg = config_to_versiongap(inst, c, p, segment_discount_factors(c, p.tau_g, 1));
      const auto sol = solve_versiongap(vg);
      CHECK(is_feasible(vg, sol.assignment));
      const auto s = assemble_schedule(vg, sol.assignment, inst);
      CHECK_NOTHROW(validate(inst, s));
      CHECK(s.steps.size() == sol.assignment.placements.size());
    }
  }
}

TEST_CASE("ptas_spm requires a discretized instance") {
  const Instance off({buyer({{q(1), q(1, 3)}}), buyer({{q(1), q(1, 2)}})}, 1);
  CHECK_THROWS_AS(ptas_spm(off, q(1, 2), {{"tau_g", "1/5"}, {"C", "2"}}), GridMismatch);
  const auto inst = discretize(off);
  CHECK_NOTHROW(ptas_spm(inst, q(1, 2), {{"tau_g", "1/5"}, {"C", "2"}}));
}
