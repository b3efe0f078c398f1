#ifndef DNYS_EXPERIMENT_HPP
#define DNYS_EXPERIMENT_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnys/types.hpp"

namespace dnys {

enum class Task { kNystrom, kKpca, kKrr, kKkmeans, kPrecond, kVerify, kSample, kRls };
enum class SamplerKind { kUniform, kRls, kDpp, kKdpp, kGreedy };

std::string task_name(Task t);
std::string sampler_name(SamplerKind s);
Task parse_task(const std::string& name);
SamplerKind parse_sampler(const std::string& name);

struct ExperimentConfig {
  Task task = Task::kNystrom;

  // data source: a CSV path, or one of the built-in generators
  std::string dataset;
  std::optional<int> target_column;
  std::optional<int> label_column;
  std::string generator;  // "toy-regression" | "gaussian-clusters"
  int gen_n = 1000;
  int gen_d = 2;
  double gen_offset = 20.0;
  double gen_noise = 0.1;

  // kernel and sampling parameters (alpha = lambda * n)
  double sigma = 1.0;
  double lambda = 1e-6;
  std::vector<SamplerKind> samplers = {SamplerKind::kUniform, SamplerKind::kRls,
                                       SamplerKind::kKdpp};
  int k = 0;       // 0 -> rounded effective dimension
  int n_rrls = 0;  // 0 -> exact leverage scores
  double rrls_oversample = 2.0;

  // greedy sweep
  int sweep_targets = 20;
  double epsilon = 0.1;
  int max_iter = 2000;

  // task knobs
  double gamma = 0.0;       // 0 -> cross-validated (krr); 1e-10 (precond)
  int kpca_components = 0;  // 0 -> floor(k/2)
  int clusters = 0;         // 0 -> number of distinct labels
  double quantile = 0.7;
  int bins = 10;

  // protocol
  int trials = 10;
  std::uint64_t seed = 1;
  bool pooled_standardize = false;
  bool test_rls_pooled = true;

  // io
  std::string out_dir = "results";
  std::string gram_cache;

  static ExperimentConfig from_json_file(const std::string& path);
  void apply_json_text(const std::string& text);
  std::string to_json() const;  // fully resolved, reproduces the run
};

/// One output row: a (trial, sampler) cell, or a (target, trial) cell of a
/// greedy sweep. Metrics are task-dependent.
struct TrialRow {
  int trial = 0;
  SamplerKind sampler = SamplerKind::kUniform;
  double target_logdet = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  std::map<std::string, double> metrics;  // always includes "logdet"
};

/// Sampler-comparison protocol: trials x samplers rows for the configured task.
std::vector<TrialRow> run_trials(const ExperimentConfig& config);

/// Greedy d_p sweep: targets span the 5th..95th percentile of log-dets seen
/// over 50 uniform and 50 k-DPP preliminary draws.
std::vector<TrialRow> run_sweep(const ExperimentConfig& config);

/// CLI entry points; write CSV rows + JSON summary under out_dir.
/// Exit codes: 0 success, 1 check failure, 2 config/data error.
int run(const ExperimentConfig& config);
int sweep_logdet(const ExperimentConfig& config);

/// Group rows by sampler/target and report mean with 0.05/0.95 quantiles.
std::string summarize_json(const std::vector<TrialRow>& rows);

}  // namespace dnys

#endif
