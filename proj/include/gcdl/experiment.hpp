#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcdl/distribution.hpp"
#include "gcdl/method.hpp"
#include "gcdl/simulation.hpp"
#include "gcdl/theory.hpp"

namespace gcdl {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_number)
      : std::runtime_error(line_number > 0
                               ? "line " + std::to_string(line_number) + ": " + msg
                               : msg),
        line(line_number) {}
  int line = 0;
};

enum class DatasetSource { kSyntheticRegression, kRosenbrock, kIdxFiles };

struct ExperimentConfig {
  DatasetSource source = DatasetSource::kSyntheticRegression;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::uint64_t iterations = 0;
  std::size_t n = 0;
  double p = 0.0;
  std::vector<int> d;  // one value: homogeneous; two: first half / second half
  std::size_t zeta = 64;
  LearningRateSchedule schedule;

  std::size_t m = 0;
  std::size_t feature_dim = 0;
  double feature_std = 10.0;
  double noise_std = 1.0;
  std::uint64_t data_seed = 1;

  std::string images_path;
  std::string labels_path;
  int class_a = 0;
  int class_b = 0;
  std::size_t subset_m = 0;

  std::string out_prefix = "run";
  std::size_t checkpoints = 50;
  bool allow_divergence = false;
  std::string preset;
};

// key = value lines, '#' comments, unknown keys rejected. A `preset` key
// merges the named preset's defaults underneath the explicit keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Returns the preset's config text, or nullptr for an unknown name.
const char* preset_text(const std::string& name);
std::vector<std::string> preset_names();

// Expands the d list of a config to per-sample degrees for m samples.
std::vector<int> expand_degrees(const std::vector<int>& d, std::size_t m);

struct RunRecord {
  Method method = Method::kOneBitGC;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::uint64_t diverged_at = 0;
  std::uint64_t rows = 0;
  std::uint64_t bits_per_iteration = 0;
  std::uint64_t final_bits = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::optional<double> final_param_error;
  std::string trace_path;
};

struct SummaryRow {
  Method method = Method::kOneBitGC;
  std::uint64_t cumulative_bits = 0;
  double mean_loss = 0.0;
  double mean_sqrt_two_loss = 0.0;
  std::optional<double> mean_param_error;
  double mean_grad_norm_sq = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
  std::string summary_path;
  std::string runs_path;
  bool any_divergence = false;
};

// Runs every (method, seed) pair, writes one trace CSV per run plus a runs
// report and a cross-seed summary aligned on shared cumulative-bit
// checkpoints. Diverged runs keep their partial trace and are excluded from
// the summary.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Locale-independent scientific formatting used in all CSV output.
std::string format_double(double value);

struct BoundsConfig {
  TheoryParams params;
  RedundancySpec d;
  std::vector<std::uint64_t> horizons;
  std::string out_prefix = "bounds";
};

BoundsConfig parse_bounds_config(const std::string& text);

// Writes <prefix>-bounds.csv with one row per horizon; returns the path.
std::string write_bounds_csv(const BoundsConfig& config);

}  // namespace gcdl
