// Copyright 2026
// See LICENSE.txt

#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsens/empirical_bayes.hpp"
#include "bsens/sampler.hpp"

namespace bsens {

struct ModelConfig {
  std::string kind;  // normal_normal | dp_mixture | esb_mixture
  // normal_normal
  double sigma2 = 1.0, mu0 = 0.0, tau2 = 1.0;
  // mixtures
  int K = 20;
  double alpha = 1.0, comp_prior_var = 25.0, obs_var = 1.0;
  // esb_mixture
  double rho = 0.0, base_mean = 0.0, base_var = 1.0;
};

struct DataConfig {
  std::vector<double> inline_values;
  std::string csv_path;
  bool csv_has_header = false;
};

struct TargetConfig {
  std::string kind;  // case_influence | hyper | esb_rho | eb | loss_mean_median
  std::string functional;  // mu | first_stick | predictive_density | occupied_clusters
  std::string hyper;       // mu0 | alpha (kind = hyper)
  double x_star = 0.0;     // predictive_density evaluation point
  std::size_t validate_index = 0;  // datapoint validated for weight derivatives
  std::optional<double> delta_omega;  // optional linear extrapolation
};

struct ValidationConfig {
  bool oracle = false;
  double fd_step = 0.01;
  std::string scheme = "central";
  std::int64_t chain_size = 20000;
  bool common_seed = false;
};

struct EBConfig {
  double bracket_lo = 1e-3;
  double bracket_hi = 1e3;
  double tol = 0.05;
  std::int64_t solver_draws = 10000;
};

struct OutputConfig {
  std::string dir = "out";
  bool dump_chain = false;
};

struct ExperimentConfig {
  std::string name;
  ModelConfig model;
  DataConfig data;
  SamplerConfig sampler;
  std::vector<TargetConfig> targets;
  ValidationConfig validation;
  EBConfig eb;
  OutputConfig output;
};

// Parses and cross-validates; collects every problem before throwing
// ConfigError (not fail-fast). Each issue names its field path.
ExperimentConfig validate_config(const std::string& path);

// Runs samplers, estimators, and oracles per the config; writes report.json
// (and validation.csv / chain.csv as enabled) under config.output.dir.
// Returns 0 on success, 1 if any validation verdict is inconsistent, 2 on a
// runtime error.
int run_experiment(const ExperimentConfig& config);

}  // namespace bsens
