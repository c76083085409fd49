// Copyright 2026
// See LICENSE.txt
//
// The core estimators. A hyperparameter derivative of a posterior expectation
// is the posterior covariance of the quantity of interest with the derivative
// of the log joint, estimated from MCMC draws; case influence and stick-prior
// sensitivity are instances with specific score functions.

#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "bsens/chain.hpp"
#include "bsens/dataset.hpp"
#include "bsens/functional.hpp"
#include "bsens/models.hpp"

namespace bsens {

struct SensitivityEstimate {
  double value = 0.0;
  double mc_se = 0.0;
  double ess_used = 0.0;
  std::int64_t n_draws = 0;
};

// per_point[n] = d E[phi] / d w_n at all-ones weights.
struct InfluenceVector {
  std::vector<double> per_point;
};

// Sample covariance (S-1 denominator) with a batch-means standard error on
// the product-deviation series. Symmetric in (f, g).
SensitivityEstimate posterior_cov(const SampleChain& chain, const Functional& f,
                                  const Functional& g);
SensitivityEstimate posterior_cov_series(std::span<const double> f,
                                         std::span<const double> g);

// d E[phi | X, omega] / d omega at the chain's base hyperparameter;
// dlogjoint must evaluate the analytic score of the log joint in omega.
SensitivityEstimate hyper_sensitivity(const SampleChain& chain, const Functional& phi,
                                      const Functional& dlogjoint);

// Bayesian empirical influence function: entry n is the posterior covariance
// of phi with the log likelihood of datapoint n. Chain must be at all-ones
// weights. Parallelized over datapoints.
InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data, const NormalNormalModel& model);
InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data,
                               const TruncatedDPMixtureModel& model);
InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data, const EsbMixtureModel& model);

// d E[phi | X, rho] / d rho at rho0: covariance of phi with the analytic
// rho-score of the dependent stick prior, evaluated per draw.
SensitivityEstimate esb_rho_sensitivity(const SampleChain& chain,
                                        const Functional& phi,
                                        const DependentStickPrior& prior);

// First-order prediction of the expectation after moving omega by delta.
double linear_extrapolate(double base_expectation, const SensitivityEstimate& est,
                          double delta_omega);

}  // namespace bsens
