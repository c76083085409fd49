// Copyright 2026
// See LICENSE.txt
//
// Ground truth for the linear estimators: finite differences through full
// re-inference, drop-one refits, and z-score comparison reports.

#pragma once
#include <cstdint>
#include <functional>

#include "bsens/dataset.hpp"
#include "bsens/functional.hpp"
#include "bsens/models.hpp"
#include "bsens/sampler.hpp"

namespace bsens {

struct FDSpec {
  enum class Scheme { central, forward };
  double step = 1e-2;  // MC pipelines; use ~1e-6 for deterministic ones
  Scheme scheme = Scheme::central;
  std::uint64_t seed_plus = 1;
  std::uint64_t seed_minus = 2;
  bool common_seed = false;  // off by default: independent refits give honest SEs
  std::int64_t chain_size = 0;  // 0 = leave the pipeline's own default
};

// A posterior expectation as a function of one scalar hyperparameter,
// reporting its Monte Carlo standard error (0 for deterministic pipelines).
struct PipelineValue {
  double value = 0.0;
  double se = 0.0;
};
using Pipeline = std::function<PipelineValue(double omega, std::uint64_t seed)>;

PipelineValue fd_derivative(const Pipeline& pipeline, double omega0,
                            const FDSpec& spec);

// E[phi] after re-running inference with w_n set to zero.
double refit_drop_one(const NormalNormalModel& model, const Dataset& data,
                      const CaseWeights& w_base, std::size_t n,
                      const SamplerConfig& config, const Functional& phi);
double refit_drop_one(const TruncatedDPMixtureModel& model, const Dataset& data,
                      const CaseWeights& w_base, std::size_t n,
                      const SamplerConfig& config, const Functional& phi);

struct ComparisonReport {
  double linear_estimate = 0.0;
  double oracle_value = 0.0;
  double abs_error = 0.0;
  double combined_se = 0.0;
  double z_score = 0.0;
  bool consistent = false;  // |z| <= 3
  bool infinite_z = false;  // both SEs zero but the values differ
};

ComparisonReport compare(double linear, double linear_se, double oracle,
                         double oracle_se);

}  // namespace bsens
