// Copyright 2026
// See LICENSE.txt
//
// Posterior samplers for the shipped models. Chains are deterministic in
// (model, data, weights, config): one mt19937_64 stream drives everything.
// Conjugate models draw i.i.d. from the exact posterior.

#pragma once
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsens/chain.hpp"
#include "bsens/dataset.hpp"
#include "bsens/models.hpp"

namespace bsens {

struct SamplerConfig {
  std::int64_t n_draws = 10000;
  std::int64_t n_burnin = 1000;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  double mh_step_size = 0.5;
};

// i.i.d. draws from the weighted conjugate posterior.
SampleChain gibbs_normal_normal(const NormalNormalModel& model, const Dataset& data,
                                const CaseWeights& w, const SamplerConfig& config);

// Blocked Gibbs for the truncated DP mixture under case weights:
// z_n | v,mu (responsibilities tempered by w_n), v | z (Beta conjugacy,
// weighted counts), mu | z,x (Gaussian conjugacy, weighted sums).
SampleChain gibbs_dp_mixture(const TruncatedDPMixtureModel& model,
                             const Dataset& data, const CaseWeights& w,
                             const SamplerConfig& config);

// Same blocked scheme with the dependent stick prior; the stick block is
// updated by componentwise random-walk Metropolis on the logit scale.
SampleChain gibbs_esb_mixture(const EsbMixtureModel& model, const Dataset& data,
                              const CaseWeights& w, const SamplerConfig& config);

// Fallback componentwise random-walk Metropolis on a continuous state vector.
using LogTarget = std::function<double(std::span<const double>)>;
SampleChain mh_generic(const LogTarget& log_target, std::vector<double> init_state,
                       const ChainLayout& layout, const SamplerConfig& config);
// Convenience adapter targeting the NormalNormal weighted log joint.
SampleChain mh_normal_normal(const NormalNormalModel& model, const Dataset& data,
                             const CaseWeights& w, const SamplerConfig& config,
                             double init_mu);

}  // namespace bsens
