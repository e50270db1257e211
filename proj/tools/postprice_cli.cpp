// postprice: posted-price mechanisms for K-unit Bayesian auctions.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "postprice/error.hpp"
#include "postprice/harness.hpp"
#include "postprice/io.hpp"

namespace pp = postprice;

namespace {

struct Options {
  std::string instance;
  std::string mechanism;
  std::string k;  // INT or A..B
  std::string epsilon = "0.5";
  std::optional<std::uint64_t> seed;
  std::string seeds;  // A..B
  std::vector<std::string> overrides;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> budget;
  std::uint64_t trials = 0;
  std::string n;  // INT or A..B
  std::size_t L = 5;
  std::string values = "1..100";
  std::string persist;
  std::string kind = "spm";
  bool timing = false;
};

std::pair<long long, long long> parse_range(const std::string& text, const char* what) {
  try {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      const long long v = std::stoll(text);
      return {v, v};
    }
    const long long lo = std::stoll(text.substr(0, dots));
    const long long hi = std::stoll(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bad ") + what + " \"" + text + "\" (want INT or A..B)");
  }
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    pp::write_file(opt.out, text);
  }
}

pp::ExperimentSpec make_spec(const Options& opt, pp::Algorithm algorithm) {
  pp::ExperimentSpec spec;
  spec.algorithm = algorithm;
  if (!opt.instance.empty()) spec.instance_file = opt.instance;
  if (!opt.k.empty()) {
    const auto [lo, hi] = parse_range(opt.k, "--k");
    for (long long k = lo; k <= hi; ++k) spec.copies.push_back(static_cast<int>(k));
  }
  if (!opt.seeds.empty()) {
    const auto [lo, hi] = parse_range(opt.seeds, "--seeds");
    if (lo < 0) throw std::invalid_argument("seeds must be non-negative");
    for (long long s = lo; s <= hi; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
  } else if (opt.seed) {
    spec.seeds.push_back(*opt.seed);
  } else if (!spec.instance_file) {
    spec.seeds.push_back(0);
  }
  if (!opt.n.empty()) {
    const auto [lo, hi] = parse_range(opt.n, "--n");
    if (lo < 1) throw std::invalid_argument("--n must be positive");
    spec.generator.num_buyers = static_cast<std::size_t>(lo);
    if (hi > lo) spec.buyers_range = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
  spec.generator.max_support = opt.L;
  const auto [vlo, vhi] = parse_range(opt.values, "--values");
  spec.generator.min_value = vlo;
  spec.generator.max_value = vhi;
  spec.epsilon = pp::parse_rational(opt.epsilon);
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--override wants KEY=VAL, got " + kv);
    spec.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (opt.budget) {
    spec.budget.max_enumeration = *opt.budget;
    spec.budget.max_dp_states = *opt.budget;
    if (!spec.overrides.count("max_configurations")) {
      spec.overrides["max_configurations"] = std::to_string(*opt.budget);
    }
  }
  if (!opt.mechanism.empty()) spec.mechanism_file = opt.mechanism;
  spec.trials = opt.trials;
  if (!opt.persist.empty()) spec.persist_dir = opt.persist;
  spec.timing = opt.timing;
  return spec;
}

int emit_table(const Options& opt, const pp::ResultTable& table) {
  if (opt.format == "json") {
    emit(opt, pp::dump(pp::to_json(table)));
  } else {
    emit(opt, pp::to_csv(table));
  }
  return table.has_budget_failures() ? 2 : 0;
}

int run_algorithms(const Options& opt, const std::vector<pp::Algorithm>& algorithms) {
  pp::ResultTable merged;
  merged.timing = opt.timing;
  for (auto a : algorithms) {
    auto table = pp::run(make_spec(opt, a));
    for (auto& row : table.rows) merged.rows.push_back(std::move(row));
  }
  std::stable_sort(merged.rows.begin(), merged.rows.end(), [](const pp::ResultRow& a, const pp::ResultRow& b) {
    if (a.copies != b.copies) return a.copies < b.copies;
    return a.seed.value_or(0) < b.seed.value_or(0);
  });
  return emit_table(opt, merged);
}

void add_source_options(CLI::App* sub, Options& opt) {
  sub->add_option("--instance", opt.instance, "Instance JSON file");
  sub->add_option("--k", opt.k, "Copies: INT or A..B");
  sub->add_option("--seed", opt.seed, "Generator seed");
  sub->add_option("--seeds", opt.seeds, "Generator seeds A..B");
  sub->add_option("--n", opt.n, "Generator buyers: INT, or A..B picked by seed");
  sub->add_option("--L", opt.L, "Generator maximum support size");
  sub->add_option("--values", opt.values, "Generator value range LO..HI");
}

void add_output_options(CLI::App* sub, Options& opt) {
  sub->add_option("--out", opt.out, "Output path (default stdout)");
  sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--persist", opt.persist, "Directory for instances and mechanisms of each row");
  sub->add_flag("--timing", opt.timing, "Add wall-clock seconds (breaks byte-identical output)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential posted-price mechanisms for K-unit Bayesian auctions"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  Options opt;

  auto* gen = app.add_subcommand("gen", "Write a random instance as JSON");
  gen->add_option("--n", opt.n, "Buyers (default 20)");
  gen->add_option("--k", opt.k, "Copies (default 1)");
  gen->add_option("--L", opt.L, "Maximum support size");
  gen->add_option("--values", opt.values, "Value range LO..HI");
  gen->add_option("--seed", opt.seed, "Seed");
  gen->add_option("--out", opt.out, "Output path (default stdout)");

  auto* eval = app.add_subcommand("eval", "Exact revenue of a schedule or tree");
  add_source_options(eval, opt);
  eval->add_option("--mechanism", opt.mechanism, "Schedule or tree JSON")->required();
  eval->add_option("--trials", opt.trials, "Monte Carlo trials (0 = exact only)");
  add_output_options(eval, opt);

  auto* lp = app.add_subcommand("lp", "LP-based SPM");
  add_source_options(lp, opt);
  add_output_options(lp, opt);

  auto* ptas_spm = app.add_subcommand("ptas-spm", "Configuration-enumeration SPM");
  auto* ptas_aspm = app.add_subcommand("ptas-aspm", "Tree-configuration ASPM");
  for (auto* sub : {ptas_spm, ptas_aspm}) {
    add_source_options(sub, opt);
    sub->add_option("--epsilon", opt.epsilon, "Accuracy in (0, 1)");
    sub->add_option("--override", opt.overrides, "Parameter override KEY=VAL (repeatable)");
    sub->add_option("--budget", opt.budget, "Configuration budget");
    add_output_options(sub, opt);
  }

  auto* oracle = app.add_subcommand("oracle", "Exact optimal SPM and/or ASPM");
  add_source_options(oracle, opt);
  oracle->add_option("--kind", opt.kind, "spm, aspm or both")->check(CLI::IsMember({"spm", "aspm", "both"}));
  oracle->add_option("--budget", opt.budget, "Enumeration / DP state budget");
  add_output_options(oracle, opt);

  auto* gap = app.add_subcommand("gap", "Adaptivity gap: optimal ASPM over optimal SPM");
  add_source_options(gap, opt);
  gap->add_option("--budget", opt.budget, "Enumeration / DP state budget");
  add_output_options(gap, opt);

  auto* bench = app.add_subcommand("bench", "Per-K minimum LP-SPM / LP ratio against both bounds");
  bench->add_option("--k", opt.k, "Copies: INT or A..B (default 1..8)");
  bench->add_option("--seeds", opt.seeds, "Seeds A..B (default 0..49)");
  bench->add_option("--n", opt.n, "Buyers (default 20)");
  bench->add_option("--L", opt.L, "Maximum support size");
  bench->add_option("--values", opt.values, "Value range LO..HI");
  bench->add_option("--out", opt.out, "Output path (default stdout)");
  bench->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed() || bench->parsed()) {
      if (opt.n.empty()) opt.n = "20";
    }
    if (gen->parsed()) {
      if (opt.k.empty()) opt.k = "1";
      auto spec = make_spec(opt, pp::Algorithm::kLp);
      auto o = spec.generator;
      o.copies = spec.copies.empty() ? 1 : spec.copies.front();
      emit(opt, pp::dump(pp::instance_to_json(pp::random_instance(o, spec.seeds.front()))));
      return 0;
    }
    if (eval->parsed()) return run_algorithms(opt, {pp::Algorithm::kEval});
    if (lp->parsed()) return run_algorithms(opt, {pp::Algorithm::kLp});
    if (ptas_spm->parsed()) return run_algorithms(opt, {pp::Algorithm::kPtasSpm});
    if (ptas_aspm->parsed()) return run_algorithms(opt, {pp::Algorithm::kPtasAspm});
    if (oracle->parsed()) {
      if (opt.kind == "spm") return run_algorithms(opt, {pp::Algorithm::kOracleSpm});
      if (opt.kind == "aspm") return run_algorithms(opt, {pp::Algorithm::kOracleAspm});
      return run_algorithms(opt, {pp::Algorithm::kOracleSpm, pp::Algorithm::kOracleAspm});
    }
    if (gap->parsed()) return run_algorithms(opt, {pp::Algorithm::kGap});
    if (bench->parsed()) {
      if (opt.k.empty()) opt.k = "1..8";
      if (opt.seeds.empty()) opt.seeds = "0..49";
      auto spec = make_spec(opt, pp::Algorithm::kLp);
      const auto rows = pp::emit_ratio_table(spec.copies, spec.seeds, spec.generator);
      emit(opt, opt.format == "json" ? pp::dump(pp::ratio_table_json(rows)) : pp::ratio_table_csv(rows));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
