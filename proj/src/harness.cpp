#include "postprice/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "postprice/error.hpp"
#include "postprice/evaluation.hpp"
#include "postprice/lp_pricing.hpp"
#include "postprice/ptas_aspm.hpp"

namespace postprice {

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  const char* name;
};

constexpr AlgorithmName kAlgorithms[] = {
    {Algorithm::kLp, "lp"},
    {Algorithm::kPtasSpm, "ptas-spm"},
    {Algorithm::kPtasAspm, "ptas-aspm"},
    {Algorithm::kOracleSpm, "oracle-spm"},
    {Algorithm::kOracleAspm, "oracle-aspm"},
    {Algorithm::kEval, "eval"},
    {Algorithm::kGap, "gap"},
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_parameters(const std::map<std::string, std::string>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

struct Job {
  int copies;
  std::optional<std::uint64_t> seed;
  std::string source;
  Instance instance;
};

std::vector<Job> make_jobs(const ExperimentSpec& spec) {
  std::vector<Job> jobs;
  if (spec.instance_file) {
    const Instance base = read_instance(*spec.instance_file);
    const std::vector<int> ks = spec.copies.empty() ? std::vector<int>{base.copies()} : spec.copies;
    for (int k : ks) {
      jobs.push_back(Job{k, std::nullopt, spec.instance_file->string(),
                         base.with_copies(k, base.allows_copies_above_buyers())});
    }
    return jobs;
  }
  const std::vector<int> ks = spec.copies.empty() ? std::vector<int>{spec.generator.copies} : spec.copies;
  for (int k : ks) {
    for (auto seed : spec.seeds) {
      RandomInstanceOptions o = spec.generator;
      o.copies = k;
      if (spec.buyers_range) {
        const auto [lo, hi] = *spec.buyers_range;
        o.num_buyers = lo + static_cast<std::size_t>(seed % (hi - lo + 1));
      }
      jobs.push_back(Job{k, seed, "random", random_instance(o, seed)});
    }
  }
  return jobs;
}

void add_ptas_parameters(ResultRow& row, const Rational& delta, const Rational& tau_g,
                         std::uint64_t examined, const std::string& best) {
  row.parameters["delta"] = format_rational(delta);
  row.parameters["tau_g"] = format_rational(tau_g);
  row.parameters["configurations"] = std::to_string(examined);
  row.detail = best.empty() ? "" : "best configuration " + best;
}

std::string persist_stem(const ResultRow& row) {
  std::string stem = to_string(row.algorithm) + "_k" + std::to_string(row.copies);
  if (row.seed) stem += "_s" + std::to_string(*row.seed);
  return stem;
}

ResultRow run_job(const ExperimentSpec& spec, const Job& job) {
  const Instance& inst = job.instance;
  ResultRow row;
  row.copies = job.copies;
  row.seed = job.seed;
  row.source = job.source;
  row.algorithm = spec.algorithm;
  row.num_buyers = inst.num_buyers();
  row.max_support = inst.max_support_size();
  row.bound = approximation_bound(job.copies);
  row.parameters["epsilon"] = format_rational(spec.epsilon);
  for (const auto& [k, v] : spec.overrides) row.parameters["override." + k] = v;

  try {
    switch (spec.algorithm) {
      case Algorithm::kLp: {
        const auto lp = solve_lp(inst);
        const auto schedule = build_lp_spm(inst, lp);
        row.value = eval_spm(inst, schedule);
        row.lp_objective = lp.objective;
        row.parameters["tau_star"] = format_rational(lp.tau_star);
        row.mechanism = schedule_to_json(schedule);
        break;
      }
      case Algorithm::kPtasSpm: {
        const auto r = ptas_spm(inst, spec.epsilon, spec.overrides);
        row.value = r.value;
        row.lp_objective = solve_lp(inst).objective;
        row.parameters["C"] = std::to_string(r.metadata.params.segment_budget);
        row.parameters["weight_cap"] = format_double(to_double(r.metadata.params.weight_cap));
        add_ptas_parameters(row, r.metadata.params.delta, r.metadata.params.tau_g,
                            r.metadata.configurations_examined,
                            r.metadata.best_configuration ? to_string(*r.metadata.best_configuration) : "");
        row.mechanism = schedule_to_json(r.schedule);
        break;
      }
      case Algorithm::kPtasAspm: {
        const auto r = ptas_aspm(inst, spec.epsilon, spec.overrides);
        const auto& p = r.metadata.params;
        row.value = r.value;
        row.lp_objective = solve_lp(inst).objective;
        row.parameters["C_tree"] = std::to_string(p.tree_budget);
        row.parameters["path_cap"] = std::to_string(p.path_budget);
        row.parameters["D"] = std::to_string(p.D);
        row.parameters["H"] = format_double(to_double(p.H));
        row.parameters["tree_segments"] = std::to_string(r.metadata.best_shape.segments);
        row.parameters["tree_depth"] = std::to_string(r.metadata.best_shape.depth);
        row.parameters["tree_branching"] = std::to_string(r.metadata.best_shape.branching);
        row.parameters["tree_leaves"] = std::to_string(r.metadata.best_shape.leaves);
        add_ptas_parameters(row, p.delta, p.tau_g, r.metadata.configurations_examined,
                            r.metadata.best_configuration ? to_string(*r.metadata.best_configuration) : "");
        row.mechanism = tree_to_json(r.tree);
        break;
      }
      case Algorithm::kOracleSpm: {
        const auto r = brute_spm_opt(inst, spec.budget);
        row.value = r.value;
        row.lp_objective = solve_lp(inst).objective;
        row.mechanism = schedule_to_json(r.schedule);
        break;
      }
      case Algorithm::kOracleAspm: {
        const auto r = exact_aspm_opt(inst, spec.budget);
        row.value = r.value;
        row.lp_objective = solve_lp(inst).objective;
        row.mechanism = tree_to_json(r.tree);
        break;
      }
      case Algorithm::kEval: {
        const auto mechanism = mechanism_from_json(read_json(*spec.mechanism_file));
        row.value = std::holds_alternative<SpmSchedule>(mechanism)
                        ? eval_spm(inst, std::get<SpmSchedule>(mechanism))
                        : eval_aspm(inst, std::get<AspmTree>(mechanism));
        if (spec.trials > 0) {
          const auto mc = monte_carlo(inst, mechanism, spec.trials, job.seed.value_or(0));
          row.mc_mean = mc.mean;
          row.mc_std_error = mc.std_error;
        }
        row.mechanism = mechanism_to_json(mechanism);
        break;
      }
      case Algorithm::kGap: {
        const auto spm = brute_spm_opt(inst, spec.budget);
        const auto aspm = exact_aspm_opt(inst, spec.budget);
        row.value = spm.value == 0 ? Rational(1) : aspm.value / spm.value;
        row.parameters["spm_value"] = format_rational(spm.value);
        row.parameters["aspm_value"] = format_rational(aspm.value);
        row.mechanism = tree_to_json(aspm.tree);
        break;
      }
    }
  } catch (const BudgetExceeded& e) {
    row.budget_exceeded = true;
    row.detail = e.what();
    row.value.reset();
    row.mechanism.reset();
  }
  return row;
}

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& entry : kAlgorithms) {
    if (entry.algorithm == a) return entry.name;
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& entry : kAlgorithms) {
    if (name == entry.name) return entry.algorithm;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

void validate(const ExperimentSpec& spec) {
  if (!spec.instance_file && spec.seeds.empty()) {
    throw std::invalid_argument("give an instance file or at least one seed");
  }
  std::set<std::uint64_t> distinct(spec.seeds.begin(), spec.seeds.end());
  if (distinct.size() != spec.seeds.size()) throw std::invalid_argument("seeds must be distinct");
  for (int k : spec.copies) {
    if (k < 1) throw std::invalid_argument("K must be at least 1");
  }
  if (spec.algorithm == Algorithm::kEval && !spec.mechanism_file) {
    throw std::invalid_argument("eval needs a mechanism file");
  }
  if (spec.buyers_range && (spec.buyers_range->first < 1 || spec.buyers_range->second < spec.buyers_range->first)) {
    throw std::invalid_argument("bad buyer range");
  }
  if (spec.epsilon <= 0 || spec.epsilon >= 1) throw std::invalid_argument("epsilon must lie in (0, 1)");
}

bool ResultTable::has_budget_failures() const {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.budget_exceeded; });
}

ResultTable run(const ExperimentSpec& spec) {
  validate(spec);
  ResultTable table;
  table.timing = spec.timing;
  for (const auto& job : make_jobs(spec)) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row = run_job(spec, job);
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (spec.persist_dir && spec.algorithm != Algorithm::kGap && row.mechanism) {
      std::filesystem::create_directories(*spec.persist_dir);
      const auto stem = persist_stem(row);
      write_file(*spec.persist_dir / (stem + ".instance.json"), dump(instance_to_json(job.instance)));
      write_file(*spec.persist_dir / (stem + ".mechanism.json"), dump(*row.mechanism));
    }
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.copies != b.copies) return a.copies < b.copies;
    return a.seed.value_or(0) < b.seed.value_or(0);
  });

  if (spec.persist_dir && spec.algorithm == Algorithm::kGap) {
    // Keep the instance with the largest ratio; the earliest row wins ties.
    const ResultRow* best = nullptr;
    for (const auto& row : table.rows) {
      if (row.value && (!best || *row.value > *best->value)) best = &row;
    }
    if (best) {
      const auto jobs = make_jobs(spec);
      for (const auto& job : jobs) {
        if (job.copies == best->copies && job.seed == best->seed) {
          std::filesystem::create_directories(*spec.persist_dir);
          Json j = instance_to_json(job.instance);
          write_file(*spec.persist_dir / "gap_best.json", dump(j));
          break;
        }
      }
    }
  }
  return table;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream out;
  out << "k,seed,source,algorithm,n,L,status,value,value_decimal,lp_objective,ratio_to_lp,bound,"
         "mc_mean,mc_std_error,parameters,detail";
  if (table.timing) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.copies << ',' << (r.seed ? std::to_string(*r.seed) : "") << ',' << csv_field(r.source) << ','
        << to_string(r.algorithm) << ',' << r.num_buyers << ',' << r.max_support << ','
        << (r.budget_exceeded ? "budget" : "ok") << ',';
    out << (r.value ? format_rational(*r.value) : "") << ',';
    out << (r.value ? format_double(to_double(*r.value)) : "") << ',';
    out << (r.lp_objective ? format_double(to_double(*r.lp_objective)) : "") << ',';
    if (r.value && r.lp_objective && *r.lp_objective > 0) {
      out << format_double(to_double(*r.value / *r.lp_objective));
    }
    out << ',' << format_double(r.bound) << ',';
    out << (r.mc_mean ? format_double(*r.mc_mean) : "") << ',';
    out << (r.mc_std_error ? format_double(*r.mc_std_error) : "") << ',';
    out << csv_field(join_parameters(r.parameters)) << ',' << csv_field(r.detail);
    if (table.timing) out << ',' << format_double(r.wall_seconds);
    out << '\n';
  }
  return out.str();
}

Json to_json(const ResultTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json j;
    j["k"] = r.copies;
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    j["source"] = r.source;
    j["algorithm"] = to_string(r.algorithm);
    j["n"] = r.num_buyers;
    j["L"] = r.max_support;
    j["status"] = r.budget_exceeded ? "budget" : "ok";
    j["value"] = r.value ? Json(format_rational(*r.value)) : Json(nullptr);
    j["value_decimal"] = r.value ? Json(format_double(to_double(*r.value))) : Json(nullptr);
    j["lp_objective"] = r.lp_objective ? Json(format_rational(*r.lp_objective)) : Json(nullptr);
    j["bound"] = format_double(r.bound);
    if (r.mc_mean) {
      j["mc_mean"] = format_double(*r.mc_mean);
      j["mc_std_error"] = format_double(*r.mc_std_error);
    }
    Json params = Json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    j["parameters"] = std::move(params);
    j["detail"] = r.detail;
    if (table.timing) j["wall_seconds"] = format_double(r.wall_seconds);
    j["mechanism"] = r.mechanism ? *r.mechanism : Json(nullptr);
    rows.push_back(std::move(j));
  }
  Json out;
  out["rows"] = std::move(rows);
  return out;
}

std::vector<RatioRow> emit_ratio_table(std::span<const int> copies,
                                       std::span<const std::uint64_t> seeds,
                                       const RandomInstanceOptions& generator) {
  std::vector<RatioRow> rows;
  for (int k : copies) {
    RatioRow row;
    row.copies = k;
    row.poisson_bound = approximation_bound(k);
    row.stirling_bound = 1.0 - 1.0 / std::sqrt(2.0 * std::numbers::pi * k);
    row.min_ratio = 1;
    for (auto seed : seeds) {
      RandomInstanceOptions o = generator;
      o.copies = k;
      const Instance inst = random_instance(o, seed);
      const auto lp = solve_lp(inst);
      if (lp.objective == 0) continue;
      const Rational ratio = eval_spm(inst, build_lp_spm(inst, lp)) / lp.objective;
      row.min_ratio = std::min(row.min_ratio, ratio);
      ++row.instances;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ratio_table_csv(std::span<const RatioRow> rows) {
  std::ostringstream out;
  out << "k,instances,min_ratio,poisson_bound,stirling_bound\n";
  for (const auto& r : rows) {
    out << r.copies << ',' << r.instances << ',' << format_double(to_double(r.min_ratio)) << ','
        << format_double(r.poisson_bound) << ',' << format_double(r.stirling_bound) << '\n';
  }
  return out.str();
}

Json ratio_table_json(std::span<const RatioRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["k"] = r.copies;
    j["instances"] = r.instances;
    j["min_ratio"] = format_rational(r.min_ratio);
    j["min_ratio_decimal"] = format_double(to_double(r.min_ratio));
    j["poisson_bound"] = format_double(r.poisson_bound);
    j["stirling_bound"] = format_double(r.stirling_bound);
    out.push_back(std::move(j));
  }
  Json wrapped;
  wrapped["rows"] = std::move(out);
  return wrapped;
}

}  // namespace postprice
