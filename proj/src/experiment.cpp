#include "dnys/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "dnys/cluster.hpp"
#include "dnys/datasets.hpp"
#include "dnys/eval.hpp"
#include "dnys/kernel.hpp"
#include "dnys/kpca.hpp"
#include "dnys/krr.hpp"
#include "dnys/leverage.hpp"
#include "dnys/nystrom.hpp"
#include "dnys/sampling.hpp"
#include "dnys/verify.hpp"

namespace dnys {

using nlohmann::json;

std::string task_name(Task t) {
  switch (t) {
    case Task::kNystrom: return "nystrom";
    case Task::kKpca: return "kpca";
    case Task::kKrr: return "krr";
    case Task::kKkmeans: return "kkmeans";
    case Task::kPrecond: return "precond";
    case Task::kVerify: return "verify";
    case Task::kSample: return "sample";
    case Task::kRls: return "rls";
  }
  return "?";
}

std::string sampler_name(SamplerKind s) {
  switch (s) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kRls: return "rls";
    case SamplerKind::kDpp: return "dpp";
    case SamplerKind::kKdpp: return "kdpp";
    case SamplerKind::kGreedy: return "greedy";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::kNystrom, Task::kKpca, Task::kKrr, Task::kKkmeans,
                 Task::kPrecond, Task::kVerify, Task::kSample, Task::kRls})
    if (task_name(t) == name) return t;
  throw std::invalid_argument("unknown task: " + name);
}

SamplerKind parse_sampler(const std::string& name) {
  for (SamplerKind s : {SamplerKind::kUniform, SamplerKind::kRls,
                        SamplerKind::kDpp, SamplerKind::kKdpp,
                        SamplerKind::kGreedy})
    if (sampler_name(s) == name) return s;
  throw std::invalid_argument("unknown sampler: " + name);
}

void ExperimentConfig::apply_json_text(const std::string& text) {
  const json j = json::parse(text);
  if (j.contains("task")) task = parse_task(j["task"].get<std::string>());
  if (j.contains("dataset")) dataset = j["dataset"].get<std::string>();
  if (j.contains("target_column")) target_column = j["target_column"].get<int>();
  if (j.contains("label_column")) label_column = j["label_column"].get<int>();
  if (j.contains("generator")) generator = j["generator"].get<std::string>();
  if (j.contains("gen_n")) gen_n = j["gen_n"].get<int>();
  if (j.contains("gen_d")) gen_d = j["gen_d"].get<int>();
  if (j.contains("gen_offset")) gen_offset = j["gen_offset"].get<double>();
  if (j.contains("gen_noise")) gen_noise = j["gen_noise"].get<double>();
  if (j.contains("sigma")) sigma = j["sigma"].get<double>();
  if (j.contains("lambda")) lambda = j["lambda"].get<double>();
  if (j.contains("samplers")) {
    samplers.clear();
    for (const auto& s : j["samplers"])
      samplers.push_back(parse_sampler(s.get<std::string>()));
  }
  if (j.contains("k")) k = j["k"].get<int>();
  if (j.contains("n_rrls")) n_rrls = j["n_rrls"].get<int>();
  if (j.contains("rrls_oversample"))
    rrls_oversample = j["rrls_oversample"].get<double>();
  if (j.contains("sweep_targets")) sweep_targets = j["sweep_targets"].get<int>();
  if (j.contains("epsilon")) epsilon = j["epsilon"].get<double>();
  if (j.contains("max_iter")) max_iter = j["max_iter"].get<int>();
  if (j.contains("gamma")) gamma = j["gamma"].get<double>();
  if (j.contains("kpca_components"))
    kpca_components = j["kpca_components"].get<int>();
  if (j.contains("clusters")) clusters = j["clusters"].get<int>();
  if (j.contains("quantile")) quantile = j["quantile"].get<double>();
  if (j.contains("bins")) bins = j["bins"].get<int>();
  if (j.contains("trials")) trials = j["trials"].get<int>();
  if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
  if (j.contains("pooled_standardize"))
    pooled_standardize = j["pooled_standardize"].get<bool>();
  if (j.contains("test_rls_pooled"))
    test_rls_pooled = j["test_rls_pooled"].get<bool>();
  if (j.contains("out_dir")) out_dir = j["out_dir"].get<std::string>();
  if (j.contains("gram_cache")) gram_cache = j["gram_cache"].get<std::string>();
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  cfg.apply_json_text(buf.str());
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["task"] = task_name(task);
  j["dataset"] = dataset;
  if (target_column) j["target_column"] = *target_column;
  if (label_column) j["label_column"] = *label_column;
  j["generator"] = generator;
  j["gen_n"] = gen_n;
  j["gen_d"] = gen_d;
  j["gen_offset"] = gen_offset;
  j["gen_noise"] = gen_noise;
  j["sigma"] = sigma;
  j["lambda"] = lambda;
  json arr = json::array();
  for (SamplerKind s : samplers) arr.push_back(sampler_name(s));
  j["samplers"] = arr;
  j["k"] = k;
  j["n_rrls"] = n_rrls;
  j["rrls_oversample"] = rrls_oversample;
  j["sweep_targets"] = sweep_targets;
  j["epsilon"] = epsilon;
  j["max_iter"] = max_iter;
  j["gamma"] = gamma;
  j["kpca_components"] = kpca_components;
  j["clusters"] = clusters;
  j["quantile"] = quantile;
  j["bins"] = bins;
  j["trials"] = trials;
  j["seed"] = seed;
  j["pooled_standardize"] = pooled_standardize;
  j["test_rls_pooled"] = test_rls_pooled;
  j["out_dir"] = out_dir;
  j["gram_cache"] = gram_cache;
  return j.dump();
}

namespace {

void validate(const ExperimentConfig& cfg) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("config." + field + ": " + why);
  };
  if (!(cfg.sigma > 0)) fail("sigma", "must be positive");
  if (!(cfg.lambda > 0)) fail("lambda", "must be positive");
  if (cfg.trials < 1) fail("trials", "must be >= 1");
  if (cfg.k < 0) fail("k", "must be >= 0");
  if (!(cfg.epsilon > 0)) fail("epsilon", "must be positive");
  if (cfg.max_iter < 1) fail("max_iter", "must be >= 1");
  if (cfg.sweep_targets < 1) fail("sweep_targets", "must be >= 1");
  if (!(cfg.quantile > 0 && cfg.quantile < 1)) fail("quantile", "must be in (0,1)");
  if (cfg.bins < 1) fail("bins", "must be >= 1");
  if (cfg.gamma < 0) fail("gamma", "must be >= 0");
  if (cfg.dataset.empty() && cfg.generator.empty())
    fail("dataset", "either a dataset path or a generator is required");
  if (!cfg.generator.empty() && cfg.generator != "toy-regression" &&
      cfg.generator != "gaussian-clusters")
    fail("generator", "unknown generator " + cfg.generator);
}

DataMatrix load_data(const ExperimentConfig& cfg) {
  if (!cfg.dataset.empty())
    return load_csv(cfg.dataset, cfg.target_column, cfg.label_column);
  if (cfg.generator == "toy-regression")
    return generate_toy_regression(cfg.gen_n, cfg.gen_d, cfg.gen_offset,
                                   cfg.gen_noise, cfg.seed);
  // Imbalanced bumps: uniform sampling tends to miss the small far one.
  const double fractions[5] = {0.55, 0.25, 0.12, 0.06, 0.02};
  const double cx[5] = {0.0, 6.0, 0.0, 6.0, 12.0};
  const double cy[5] = {0.0, 0.0, 6.0, 6.0, 12.0};
  std::vector<ClusterSpec> specs(5);
  for (int c = 0; c < 5; ++c) {
    specs[c].center = Vector(2);
    specs[c].center << cx[c], cy[c];
    specs[c].stddev = 1.0;
    specs[c].count = std::max(1, static_cast<int>(std::lround(cfg.gen_n * fractions[c])));
  }
  return generate_gaussian_clusters(specs, cfg.seed);
}

KernelMatrix gram_with_cache(const ExperimentConfig& cfg, const DataMatrix& data) {
  if (!cfg.gram_cache.empty() && std::filesystem::exists(cfg.gram_cache)) {
    KernelMatrix k = load_gram(cfg.gram_cache);
    if (k.size() != data.rows() || k.sigma != cfg.sigma)
      throw std::runtime_error("gram cache " + cfg.gram_cache +
                               " does not match the data/bandwidth");
    return k;
  }
  KernelMatrix k = gram(data, cfg.sigma);
  if (!cfg.gram_cache.empty()) save_gram(k, cfg.gram_cache);
  return k;
}

// Everything the landmark-comparison tasks share.
struct Workbench {
  DataMatrix data;  // standardized
  KernelMatrix kernel;
  LeverageScores scores;
  double alpha = 0.0;
  int subset_size = 0;
};

Workbench prepare(const ExperimentConfig& cfg) {
  Workbench w;
  DataMatrix raw = load_data(cfg);
  w.data = standardize(raw).first;
  w.alpha = cfg.lambda * w.data.rows();
  w.kernel = gram_with_cache(cfg, w.data);
  if (cfg.n_rrls > 0 && cfg.n_rrls < w.data.rows())
    w.scores = rls_recursive(w.data, cfg.sigma, w.alpha, cfg.n_rrls, cfg.seed,
                             cfg.rrls_oversample);
  else
    w.scores = rls_exact(w.kernel, w.alpha);
  w.subset_size = cfg.k > 0 ? cfg.k : effective_dimension_size(w.scores);
  if (w.subset_size > w.data.rows())
    throw std::invalid_argument("config.k: larger than the dataset");
  return w;
}

LandmarkSet draw_landmarks(SamplerKind kind, const Workbench& w,
                           const DppSampler* dpp, std::uint64_t seed) {
  switch (kind) {
    case SamplerKind::kUniform:
      return sample_uniform(w.data.rows(), w.subset_size, seed);
    case SamplerKind::kRls:
      return sample_rls(w.scores, w.subset_size, seed);
    case SamplerKind::kDpp:
      return dpp->draw(seed);
    case SamplerKind::kKdpp:
      return dpp->draw_k(w.subset_size, seed);
    case SamplerKind::kGreedy:
      throw std::invalid_argument(
          "config.samplers: the greedy sampler runs through sweep_logdet");
  }
  throw std::logic_error("unreachable");
}

bool needs_dpp(const std::vector<SamplerKind>& samplers) {
  return std::any_of(samplers.begin(), samplers.end(), [](SamplerKind s) {
    return s == SamplerKind::kDpp || s == SamplerKind::kKdpp;
  });
}

double kappa_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

// ---- per-task metric evaluation on one landmark set ----

std::map<std::string, double> nystrom_metrics(const Workbench& w,
                                              const LandmarkSet& c) {
  const Diagnostics d = diagnostics(w.kernel, c);
  return {{"logdet", d.logdet},
          {"lambda_min", d.lambda_min},
          {"lambda_max", d.lambda_max},
          {"kappa", d.condition_number},
          {"frob_rel_error", d.frob_rel_error}};
}

std::map<std::string, double> kpca_metrics(const ExperimentConfig& cfg,
                                           const Workbench& w,
                                           const LandmarkSet& c) {
  auto metrics = nystrom_metrics(w, c);
  const NystromFactor factor = build(w.kernel, c);
  const int components =
      cfg.kpca_components > 0 ? cfg.kpca_components : std::max(1, c.size() / 2);
  const KpcaModel model = fit_kpca(factor, components);
  metrics["reconstruction_error"] = reconstruction_error(w.kernel, model);
  metrics["components"] = components;
  return metrics;
}

std::map<std::string, double> precond_metrics(const ExperimentConfig& cfg,
                                              const Workbench& w,
                                              SamplerKind kind,
                                              const LandmarkSet& c) {
  const double gamma = cfg.gamma > 0 ? cfg.gamma : 1e-10;
  const int n = w.data.rows();
  const NystromFactor factor = build(w.kernel, c);
  const Matrix kcc = submatrix(w.kernel, c);
  const Matrix a =
      factor.k_cross.transpose() * factor.k_cross + (n * gamma) * kcc;

  Vector landmark_scores(c.size());
  for (int i = 0; i < c.size(); ++i)
    landmark_scores[i] = w.scores.scores[c.indices[i]];
  const DChoice d_choice = kind == SamplerKind::kUniform
                               ? DChoice::kUniform
                               : DChoice::kInverseLeverage;
  const Preconditioner p = build_preconditioner(
      factor.chol_cc, d_choice == DChoice::kInverseLeverage ? &landmark_scores
                                                            : nullptr,
      n, gamma, d_choice);
  const Matrix a_tilde = p.b.transpose() * a * p.b;

  return {{"logdet", logdet(factor.chol_cc)},
          {"kappa_plain", kappa_of(a)},
          {"kappa_precond", kappa_of(a_tilde)},
          {"gamma", gamma}};
}

std::map<std::string, double> kkmeans_metrics(const ExperimentConfig& cfg,
                                              const Workbench& w,
                                              const LandmarkSet& c,
                                              std::uint64_t seed) {
  if (!w.data.labels)
    throw std::invalid_argument("kkmeans task needs labelled data");
  int s = cfg.clusters;
  if (s == 0) {
    std::vector<int> distinct = *w.data.labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    s = static_cast<int>(distinct.size());
  }
  if (s > c.size())
    throw std::invalid_argument("kkmeans: cluster count exceeds landmark count");
  const NystromFactor factor = build(w.kernel, c);
  const Matrix features = nystrom_features(factor, s);
  ClusterResult result = kmeans(features, s, 10, 300, seed);
  result.nmi_vs_truth = nmi(result.assignments, *w.data.labels);
  return {{"logdet", logdet(factor.chol_cc)},
          {"nmi", *result.nmi_vs_truth},
          {"inertia", result.inertia},
          {"clusters", static_cast<double>(s)}};
}

// ---- KRR pipeline (split + stratified evaluation) ----

struct KrrBench {
  DataMatrix train;  // standardized with train (or pooled) stats
  DataMatrix test;
  KernelMatrix k_train;
  LeverageScores train_scores;  // alpha = lambda * n_train
  Vector test_scores;           // test-set RLS for stratification
  double alpha = 0.0;
  int subset_size = 0;
};

KrrBench prepare_krr(const ExperimentConfig& cfg, std::uint64_t split_seed) {
  DataMatrix raw = load_data(cfg);
  if (!raw.target)
    throw std::invalid_argument("krr task needs a target column");

  // Pooled standardization drives the stratified split and the test RLS.
  auto [pooled, pooled_stats] = standardize(raw);
  const KernelMatrix k_pooled = gram(pooled, cfg.sigma);
  const LeverageScores pooled_split_scores =
      rls_exact(k_pooled, cfg.lambda * pooled.rows());

  SplitResult split = split_half(raw, split_seed, &pooled_split_scores.scores);

  KrrBench b;
  if (cfg.pooled_standardize) {
    b.train = standardize(split.train, pooled_stats).first;
    b.test = standardize(split.test, pooled_stats).first;
  } else {
    auto [train_std, train_stats] = standardize(split.train);
    b.train = std::move(train_std);
    b.test = standardize(split.test, train_stats).first;
  }
  b.alpha = cfg.lambda * b.train.rows();
  b.k_train = gram(b.train, cfg.sigma);
  b.train_scores = rls_exact(b.k_train, b.alpha);
  b.subset_size =
      cfg.k > 0 ? cfg.k : effective_dimension_size(b.train_scores);

  // Test RLS: pooled Gram at the sampling alpha by default, test-only otherwise.
  if (cfg.test_rls_pooled) {
    const LeverageScores pooled_scores = rls_exact(k_pooled, b.alpha);
    b.test_scores = Vector(split.test_indices.size());
    for (std::size_t i = 0; i < split.test_indices.size(); ++i)
      b.test_scores[static_cast<int>(i)] =
          pooled_scores.scores[split.test_indices[i]];
  } else {
    const KernelMatrix k_test = gram(b.test, cfg.sigma);
    b.test_scores = rls_exact(k_test, cfg.lambda * b.test.rows()).scores;
  }
  return b;
}

std::map<std::string, double> krr_metrics(const ExperimentConfig& cfg,
                                          const KrrBench& b,
                                          const LandmarkSet& c,
                                          std::uint64_t seed) {
  const NystromFactor factor = build(b.k_train, c);
  const double gamma =
      cfg.gamma > 0
          ? cfg.gamma
          : cross_validate_gamma(b.train, c, cfg.sigma, default_gamma_grid(), 5,
                                 seed);
  KrrModel model = fit_direct(factor.k_cross, factor.chol_cc,
                              *b.train.target, gamma);
  model.sigma = cfg.sigma;

  const DataMatrix landmark_points = select_rows(b.train, c.indices);
  const Vector pred = predict(model, b.test.values, landmark_points.values);
  const Vector& y = *b.test.target;

  const StratifiedReport report =
      stratified_mape(b.test_scores, y, pred, cfg.quantile, cfg.bins);

  const auto take = [&](const std::vector<int>& idx, const Vector& v) {
    Vector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      out[static_cast<int>(i)] = v[idx[i]];
    return out;
  };
  const auto [bulk, tail] = stratify(b.test_scores, cfg.quantile);

  std::map<std::string, double> m = {
      {"logdet", logdet(factor.chol_cc)},
      {"gamma", gamma},
      {"mape_overall", report.overall_metric},
      {"mape_bulk", report.bulk_metric},
      {"mape_tail", report.tail_metric},
      {"smape_overall", smape(y, pred)},
  };
  m["smape_bulk"] = bulk.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : smape(take(bulk, y), take(bulk, pred));
  m["smape_tail"] = tail.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : smape(take(tail, y), take(tail, pred));
  return m;
}

std::map<std::string, double> trial_metrics(const ExperimentConfig& cfg,
                                            const Workbench& w,
                                            SamplerKind kind,
                                            const LandmarkSet& c,
                                            std::uint64_t seed) {
  switch (cfg.task) {
    case Task::kNystrom:
      return nystrom_metrics(w, c);
    case Task::kKpca:
      return kpca_metrics(cfg, w, c);
    case Task::kPrecond:
      return precond_metrics(cfg, w, kind, c);
    case Task::kKkmeans:
      return kkmeans_metrics(cfg, w, c, seed);
    default:
      throw std::invalid_argument("task " + task_name(cfg.task) +
                                  " has no per-landmark metrics");
  }
}

}  // namespace

std::vector<TrialRow> run_trials(const ExperimentConfig& cfg) {
  validate(cfg);

  if (cfg.task == Task::kKrr) {
    const std::size_t n_samplers = cfg.samplers.size();
    std::vector<TrialRow> rows(cfg.trials * n_samplers);
    std::vector<std::string> errors(cfg.trials);
#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < cfg.trials; ++trial) {
      try {
        const std::uint64_t trial_seed = cfg.seed + trial;
        const KrrBench bench = prepare_krr(cfg, trial_seed);
        Workbench w;  // adapter so draw_landmarks sees the train half
        w.data = bench.train;
        w.kernel = bench.k_train;
        w.scores = bench.train_scores;
        w.alpha = bench.alpha;
        w.subset_size = bench.subset_size;
        std::unique_ptr<DppSampler> dpp;
        if (needs_dpp(cfg.samplers))
          dpp = std::make_unique<DppSampler>(w.kernel, w.alpha);
        for (std::size_t si = 0; si < n_samplers; ++si) {
          const std::uint64_t draw_seed = trial_seed + 1000003 * (si + 1);
          const LandmarkSet c =
              draw_landmarks(cfg.samplers[si], w, dpp.get(), draw_seed);
          TrialRow row;
          row.trial = trial;
          row.sampler = cfg.samplers[si];
          row.metrics = krr_metrics(cfg, bench, c, draw_seed);
          rows[trial * n_samplers + si] = std::move(row);
        }
      } catch (const std::exception& e) {
        errors[trial] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw std::runtime_error(e);
    return rows;
  }

  const Workbench w = prepare(cfg);
  std::unique_ptr<DppSampler> dpp;
  if (needs_dpp(cfg.samplers))
    dpp = std::make_unique<DppSampler>(w.kernel, w.alpha);

  const int n_samplers = static_cast<int>(cfg.samplers.size());
  std::vector<TrialRow> rows(cfg.trials * n_samplers);
  std::vector<std::string> errors(rows.size());
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (int si = 0; si < n_samplers; ++si) {
      const int slot = trial * n_samplers + si;
      try {
        const std::uint64_t draw_seed =
            cfg.seed + trial + 1000003 * (si + 1);
        const LandmarkSet c =
            draw_landmarks(cfg.samplers[si], w, dpp.get(), draw_seed);
        TrialRow row;
        row.trial = trial;
        row.sampler = cfg.samplers[si];
        row.metrics = trial_metrics(cfg, w, cfg.samplers[si], c, draw_seed);
        rows[slot] = std::move(row);
      } catch (const std::exception& e) {
        errors[slot] = e.what();
      }
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  return rows;
}

std::vector<TrialRow> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.task == Task::kVerify || cfg.task == Task::kSample ||
      cfg.task == Task::kRls)
    throw std::invalid_argument("sweep_logdet: task " + task_name(cfg.task) +
                                " has no sweep form");

  // For the KRR task the sweep runs on a fixed split.
  std::optional<KrrBench> krr_bench;
  Workbench w;
  if (cfg.task == Task::kKrr) {
    krr_bench = prepare_krr(cfg, cfg.seed);
    w.data = krr_bench->train;
    w.kernel = krr_bench->k_train;
    w.scores = krr_bench->train_scores;
    w.alpha = krr_bench->alpha;
    w.subset_size = krr_bench->subset_size;
  } else {
    w = prepare(cfg);
  }

  // Preliminary draws fix the attainable log-determinant range.
  const DppSampler dpp(w.kernel, w.alpha);
  std::vector<double> prelim;
  prelim.reserve(100);
  for (int t = 0; t < 50; ++t) {
    for (int kind = 0; kind < 2; ++kind) {
      const std::uint64_t s = cfg.seed + 7919 * (t + 1) + kind;
      try {
        const LandmarkSet c = kind == 0
                                  ? sample_uniform(w.data.rows(), w.subset_size, s)
                                  : dpp.draw_k(w.subset_size, s);
        prelim.push_back(logdet(cholesky(submatrix(w.kernel, c), c.indices)));
      } catch (const NotPositiveDefinite&) {
        // skip numerically singular draws
      }
    }
  }
  if (prelim.size() < 2)
    throw std::runtime_error("sweep_logdet: no factorizable preliminary draws");
  const double lo = quantile_type7(prelim, 0.05);
  const double hi = quantile_type7(prelim, 0.95);

  std::vector<double> targets(cfg.sweep_targets);
  for (int t = 0; t < cfg.sweep_targets; ++t)
    targets[t] = cfg.sweep_targets == 1
                     ? 0.5 * (lo + hi)
                     : lo + (hi - lo) * t / (cfg.sweep_targets - 1);

  std::vector<TrialRow> rows(cfg.sweep_targets * cfg.trials);
  std::vector<std::string> errors(rows.size());
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int ti = 0; ti < cfg.sweep_targets; ++ti) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::size_t slot = ti * cfg.trials + trial;
      try {
        SwapConfig sc;
        sc.k = w.subset_size;
        sc.target_logdet = targets[ti];
        sc.epsilon = cfg.epsilon;
        sc.max_iter = cfg.max_iter;
        sc.seed = cfg.seed + static_cast<std::uint64_t>(ti) * cfg.trials + trial;
        const SwapResult result = greedy_swap(w.kernel, w.scores, sc);

        TrialRow row;
        row.trial = trial;
        row.sampler = SamplerKind::kGreedy;
        row.target_logdet = targets[ti];
        row.converged = result.converged;
        row.metrics = cfg.task == Task::kKrr
                          ? krr_metrics(cfg, *krr_bench, result.landmarks, sc.seed)
                          : trial_metrics(cfg, w, SamplerKind::kGreedy,
                                          result.landmarks, sc.seed);
        row.metrics["iterations"] = result.iterations;
        row.metrics["achieved_logdet"] = result.achieved_logdet;
        rows[slot] = std::move(row);
      } catch (const std::exception& e) {
        errors[slot] = e.what();
      }
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  return rows;
}

namespace {

std::vector<std::string> metric_keys(const std::vector<TrialRow>& rows) {
  std::vector<std::string> keys;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.metrics)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

void write_rows_csv(const ExperimentConfig& cfg,
                    const std::vector<TrialRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# config: " << cfg.to_json() << "\n";
  const auto keys = metric_keys(rows);
  out << "trial,sampler,target_logdet,converged";
  for (const auto& k : keys) out << "," << k;
  out << "\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.trial << "," << sampler_name(r.sampler) << ",";
    if (std::isnan(r.target_logdet))
      out << "";
    else
      out << r.target_logdet;
    out << "," << (r.converged ? 1 : 0);
    for (const auto& k : keys) {
      out << ",";
      const auto it = r.metrics.find(k);
      if (it != r.metrics.end()) out << it->second;
    }
    out << "\n";
  }
}

}  // namespace

std::string summarize_json(const std::vector<TrialRow>& rows) {
  // group key: sampler, plus the sweep target when present
  std::map<std::string, std::vector<const TrialRow*>> groups;
  for (const auto& r : rows) {
    std::string key = sampler_name(r.sampler);
    if (!std::isnan(r.target_logdet)) {
      std::ostringstream os;
      os.precision(10);
      os << "@" << r.target_logdet;
      key += os.str();
    }
    groups[key].push_back(&r);
  }

  json out;
  for (const auto& [key, members] : groups) {
    json g;
    g["count"] = members.size();
    for (const auto& metric : metric_keys(rows)) {
      std::vector<double> vals;
      for (const TrialRow* r : members) {
        const auto it = r->metrics.find(metric);
        if (it != r->metrics.end() && !std::isnan(it->second))
          vals.push_back(it->second);
      }
      if (vals.empty()) continue;
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      json m;
      m["mean"] = mean;
      m["q05"] = quantile_type7(vals, 0.05);
      m["q95"] = quantile_type7(vals, 0.95);
      g[metric] = m;
    }
    out[key] = g;
  }
  return out.dump(2);
}

namespace {

int run_files(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows,
              const std::string& stem) {
  std::filesystem::create_directories(cfg.out_dir);
  write_rows_csv(cfg, rows, cfg.out_dir + "/" + stem + ".csv");
  std::ofstream summary(cfg.out_dir + "/" + stem + "_summary.json");
  summary << summarize_json(rows) << "\n";
  return 0;
}

}  // namespace

int run(const ExperimentConfig& cfg) {
  try {
    validate(cfg);
    if (cfg.task == Task::kVerify)
      return run_verify_checks(std::cout, cfg.seed) ? 0 : 1;

    if (cfg.task == Task::kSample || cfg.task == Task::kRls) {
      const Workbench w = prepare(cfg);
      std::filesystem::create_directories(cfg.out_dir);
      if (cfg.task == Task::kRls) {
        std::ofstream out(cfg.out_dir + "/rls.csv");
        out << "# config: " << cfg.to_json() << "\n";
        out << "index,score\n";
        out.precision(12);
        for (int i = 0; i < w.scores.scores.size(); ++i)
          out << i << "," << w.scores.scores[i] << "\n";
        std::cout << "effective_dimension "
                  << effective_dimension(w.scores) << "\n";
        return 0;
      }
      std::unique_ptr<DppSampler> dpp;
      if (needs_dpp(cfg.samplers))
        dpp = std::make_unique<DppSampler>(w.kernel, w.alpha);
      for (std::size_t si = 0; si < cfg.samplers.size(); ++si) {
        const LandmarkSet c = draw_landmarks(
            cfg.samplers[si], w, dpp.get(), cfg.seed + 1000003 * (si + 1));
        std::ofstream out(cfg.out_dir + "/sample_" +
                          sampler_name(cfg.samplers[si]) + ".csv");
        out << "# config: " << cfg.to_json() << "\n";
        out << "index\n";
        for (int i : c.indices) out << i << "\n";
      }
      return 0;
    }

    const std::vector<TrialRow> rows = run_trials(cfg);
    return run_files(cfg, rows, task_name(cfg.task));
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int sweep_logdet(const ExperimentConfig& cfg) {
  try {
    const std::vector<TrialRow> rows = run_sweep(cfg);
    return run_files(cfg, rows, task_name(cfg.task) + "_sweep");
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dnys
