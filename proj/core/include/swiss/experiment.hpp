#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swiss/combiners.hpp"
#include "swiss/metrics.hpp"
#include "swiss/sampler.hpp"
#include "swiss/targets.hpp"

namespace swiss {

/// Which posterior to study.
///
///   logistic-rare       simulated rare-feature logistic regression (or a
///                       dataset loaded from `data_path`)
///   rare-bernoulli      θ(1−θ)^999 replicated on every batch
///   warped-gaussian     banana-shaped density replicated on every batch
///   gaussian-mixture    two unit Gaussians at mu1, mu2 replicated on every batch
///   gaussian-conjugate  Gaussian sub-posteriors with inverse-Wishart
///                       covariances, drawn exactly (no MCMC)
struct TargetSpec {
  std::string name = "logistic-rare";
  long n = 20000;
  int dim = 5;
  Vector mu1 = Vector{{-2.0, 0.0}};
  Vector mu2 = Vector{{2.0, 0.0}};
  double prior_variance = kLogisticPriorVariance;
  std::string data_path;
};

/// Where the Gaussian suite's combiners get their batch moments: estimated
/// from the draws, or the suite's analytic (μ_b, V_b) injected.
enum class MomentSource { Estimated, Analytic };
MomentSource parse_moment_source(std::string_view name);
std::string_view to_string(MomentSource m);

struct ExperimentConfig {
  TargetSpec target;
  int batches = 5;
  int samples = 5000;
  int burn_in = 1000;
  int thin = 1;
  InitStrategy init = InitStrategy::PriorDraw;
  /// Reference draws; 0 picks `samples` for MCMC targets and batches·samples
  /// for the exact Gaussian suite.
  long reference_samples = 0;
  int reference_thin = 0;  ///< 0 means `thin`
  std::uint64_t seed = 1;
  int repetitions = 5;
  PartitionScheme partition = PartitionScheme::RandomEqual;
  std::vector<CombineMethod> combiners{CombineMethod::Swiss, CombineMethod::Consensus,
                                       CombineMethod::AverageRecentring,
                                       CombineMethod::Barycenter};
  std::vector<std::string> metrics{"mahalanobis", "skew", "iad"};
  MomentSource moments = MomentSource::Estimated;  ///< gaussian-conjugate only
  int workers = 1;
  std::string output_dir;

  /// Checks names, ranges and the per-combiner exponent convention.
  void validate() const;
};

/// Exponent convention each combiner consumes.
Convention convention_for(CombineMethod method);

/// Per-batch sampler targets for an MCMC target under `conv`. Full yields a
/// single batch on the whole data. logistic-rare needs `data`, and `part`
/// unless conv is Full.
TargetFamily make_target_family(const TargetSpec& spec, int num_batches, Convention conv,
                                const Dataset* data, const Partition* part);

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

struct CombinerRun {
  CombineMethod method = CombineMethod::Swiss;
  MetricReport metrics;
  double wall_time_seconds = 0.0;
  long rows = 0;
};

struct ChainSummary {
  std::string role;  ///< "reference", "inflated" or "sub-posterior"
  int batch_id = 0;
  double acceptance_rate = 0.0;
  double burn_in_acceptance_rate = 0.0;
  double final_scale = 0.0;
  std::optional<std::string> warning;
};

struct RunReport {
  int repetition = 0;
  std::vector<CombinerRun> combiners;
  std::vector<ChainSummary> chains;
  std::optional<std::string> error;
  bool error_numerical = false;
};

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct CombinerAggregate {
  CombineMethod method = CombineMethod::Swiss;
  int runs = 0;
  MeanAndError mahalanobis, skew_dev, iad, wall_time_seconds;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunReport> runs;
  std::vector<CombinerAggregate> aggregates;

  bool ok() const;
};

/// Mean ± standard error of the mean over `values`.
MeanAndError mean_and_error(const std::vector<double>& values);

/// Runs every repetition. A failing repetition is recorded in its RunReport
/// (stage and batch in the message) and excluded from the aggregates.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Timing fields are the keys ending in "time_seconds" and their aggregates;
/// with include_timing = false they are omitted, along with workers and
/// output_dir, so reports of identical configs compare byte for byte.
std::string report_to_json(const ExperimentReport& report, bool include_timing = true);
ExperimentReport report_from_json(const std::string& json_text);

/// One row per (repetition, combiner); unrequested metrics are left blank.
std::string runs_to_csv(const ExperimentReport& report);

/// Writes run_<r>.json per repetition, the merged report.json and runs.csv.
void write_experiment_outputs(const ExperimentReport& report,
                              const std::filesystem::path& dir);

// --- dimension scaling ----------------------------------------------------

struct BenchConfig {
  std::vector<int> dims{5, 10, 20, 40, 80};
  int batches = 10;
  int samples = 5000;
  long reference_samples = 0;  ///< 0 means batches·samples
  std::uint64_t seed = 1;
  int repetitions = 1;
  std::vector<CombineMethod> combiners{CombineMethod::Swiss, CombineMethod::Consensus,
                                       CombineMethod::AverageRecentring,
                                       CombineMethod::Barycenter};
  MomentSource moments = MomentSource::Estimated;
  int workers = 1;
};

struct BenchRow {
  int d = 0;
  CombineMethod method = CombineMethod::Swiss;
  double iad = 0.0;
  double time_seconds = 0.0;
  int repetition = 0;
};

std::vector<BenchRow> bench_dimension_scaling(const BenchConfig& config);
/// Columns: d,method,iad,time_seconds,repetition.
std::string bench_to_csv(const std::vector<BenchRow>& rows);

/// Exact-draw Gaussian suite for one repetition: per combiner, the combined
/// sample and its metrics against `reference_samples` exact full-posterior
/// draws.
struct GaussianSuiteRun {
  GaussianSuite suite;
  Matrix reference;
  std::vector<SampleBatch> inflated;
  std::vector<SampleBatch> sub_posterior;
};

GaussianSuiteRun prepare_gaussian_suite(int d, int batches, int samples,
                                        long reference_samples, std::uint64_t seed,
                                        int repetition);

}  // namespace swiss
