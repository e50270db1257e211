#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "postprice/io.hpp"
#include "postprice/model.hpp"
#include "postprice/oracles.hpp"
#include "postprice/ptas_spm.hpp"

namespace postprice {

enum class Algorithm { kLp, kPtasSpm, kPtasAspm, kOracleSpm, kOracleAspm, kEval, kGap };

std::string to_string(Algorithm a);
// Throws std::invalid_argument on an unknown name.
Algorithm parse_algorithm(const std::string& name);

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::kLp;

  // Instance source: a file, or the generator run once per seed.
  std::optional<std::filesystem::path> instance_file;
  RandomInstanceOptions generator{20, 1, 5, 1, 100, 1, 50};
  // When set, seed s uses n = lo + s mod (hi - lo + 1) buyers.
  std::optional<std::pair<std::size_t, std::size_t>> buyers_range;
  std::vector<std::uint64_t> seeds;

  // Copies to run with; empty means the file's K or generator.copies.
  std::vector<int> copies;

  Rational epsilon{1, 2};
  Overrides overrides;
  std::optional<std::filesystem::path> mechanism_file;  // eval
  std::uint64_t trials = 0;                              // eval: Monte Carlo trials
  OracleBudget budget;
  // Writes each row's instance and mechanism (gap: the best instance) here.
  std::optional<std::filesystem::path> persist_dir;
  bool timing = false;
};

// Throws std::invalid_argument for inconsistent specs.
void validate(const ExperimentSpec& spec);

struct ResultRow {
  int copies = 0;
  std::optional<std::uint64_t> seed;
  std::string source;  // file path or "random"
  Algorithm algorithm = Algorithm::kLp;
  std::size_t num_buyers = 0;
  std::size_t max_support = 0;
  bool budget_exceeded = false;
  std::string detail;  // budget message, or notes such as the best configuration
  std::optional<Rational> value;
  std::optional<Rational> lp_objective;
  double bound = 0;  // approximation_bound(K)
  std::optional<double> mc_mean;
  std::optional<double> mc_std_error;
  std::map<std::string, std::string> parameters;
  std::optional<Json> mechanism;
  double wall_seconds = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // sorted by (K, seed)
  bool timing = false;

  bool has_budget_failures() const;
};

// Rows failing on a budget are marked and the run continues; other errors
// propagate.
ResultTable run(const ExperimentSpec& spec);

std::string to_csv(const ResultTable& table);
Json to_json(const ResultTable& table);

struct RatioRow {
  int copies = 0;
  std::size_t instances = 0;
  Rational min_ratio;        // min of eval(LP-SPM) / LP objective
  double poisson_bound = 0;  // 1 - K^K / (K! e^K)
  double stirling_bound = 0; // 1 - 1 / sqrt(2 pi K)
};

// `generator.copies` is replaced by each K.
std::vector<RatioRow> emit_ratio_table(std::span<const int> copies,
                                       std::span<const std::uint64_t> seeds,
                                       const RandomInstanceOptions& generator);

std::string ratio_table_csv(std::span<const RatioRow> rows);
Json ratio_table_json(std::span<const RatioRow> rows);

// Doubles printed with %.12g.
std::string format_double(double x);

}  // namespace postprice
