#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "dnys/experiment.hpp"

// Experiment runner. One subcommand per task plus `sweep` for the greedy
// log-determinant sweeps; every config field has a flag override. A JSON
// config (--config) is applied first, explicit flags win.
int main(int argc, char** argv) {
  dnys::ExperimentConfig cfg;

  // Load the config file before binding flags so flag values override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        cfg = dnys::ExperimentConfig::from_json_file(argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"Diversity-aware landmark selection for Nystrom kernel methods"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sampler_names;
  int target_column = 0, label_column = 0;
  std::string sweep_task = "nystrom";

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--dataset", cfg.dataset, "CSV dataset path");
    cmd->add_option("--target-column", target_column,
                    "target column index (negative counts from the end)");
    cmd->add_option("--label-column", label_column, "label column index");
    cmd->add_option("--generator", cfg.generator,
                    "toy-regression | gaussian-clusters");
    cmd->add_option("--gen-n", cfg.gen_n, "generated sample count");
    cmd->add_option("--gen-d", cfg.gen_d, "generated dimension");
    cmd->add_option("--gen-offset", cfg.gen_offset, "toy regression offset b");
    cmd->add_option("--gen-noise", cfg.gen_noise, "toy regression noise std");
    cmd->add_option("--sigma", cfg.sigma, "kernel bandwidth");
    cmd->add_option("--lambda", cfg.lambda, "ridge scale; alpha = lambda * n");
    cmd->add_option("--samplers", sampler_names,
                    "subset of uniform,rls,dpp,kdpp");
    cmd->add_option("--k", cfg.k, "subset size (0 = rounded d_eff)");
    cmd->add_option("--n-rrls", cfg.n_rrls,
                    "approximate-RLS budget (0 = exact scores)");
    cmd->add_option("--rrls-oversample", cfg.rrls_oversample,
                    "RRLS sketch oversampling multiplier");
    cmd->add_option("--sweep-targets", cfg.sweep_targets, "sweep grid size");
    cmd->add_option("--epsilon", cfg.epsilon, "greedy log-det tolerance");
    cmd->add_option("--max-iter", cfg.max_iter, "greedy iteration cap");
    cmd->add_option("--gamma", cfg.gamma,
                    "KRR ridge weight (0 = cross-validated)");
    cmd->add_option("--kpca-components", cfg.kpca_components,
                    "retained components (0 = floor(k/2))");
    cmd->add_option("--clusters", cfg.clusters,
                    "cluster count (0 = from labels)");
    cmd->add_option("--quantile", cfg.quantile, "bulk/tail split quantile");
    cmd->add_option("--bins", cfg.bins, "leverage-score histogram bins");
    cmd->add_option("--trials", cfg.trials, "repetitions per sampler");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_flag("--pooled-standardize", cfg.pooled_standardize,
                  "standardize with pooled statistics instead of train-only");
    cmd->add_flag("--test-rls-test-only",
                  [&cfg](std::int64_t) { cfg.test_rls_pooled = false; },
                  "compute test RLS on the test half only");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--gram-cache", cfg.gram_cache,
                    "binary Gram matrix cache path");
    if (cmd->get_name() == "sweep")
      cmd->add_option("--task", sweep_task, "task the sweep evaluates");
  };

  for (const char* name : {"nystrom", "kpca", "krr", "kkmeans", "precond",
                           "verify", "sample", "rls", "sweep"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    const bool sweep_mode = sub->get_name() == "sweep";
    cfg.task = dnys::parse_task(sweep_mode ? sweep_task : sub->get_name());
    if (sub->count("--target-column")) cfg.target_column = target_column;
    if (sub->count("--label-column")) cfg.label_column = label_column;
    if (!sampler_names.empty()) {
      cfg.samplers.clear();
      for (const auto& s : sampler_names)
        cfg.samplers.push_back(dnys::parse_sampler(s));
    }
    return sweep_mode ? dnys::sweep_logdet(cfg) : dnys::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
