// Copyright 2026
// See LICENSE.txt
//
// The Bayesian models the toolkit ships with: state, weighted log joint,
// analytic hyperparameter scores, and exact posteriors where conjugacy
// allows. All objects are immutable after construction and thread-safe.

#pragma once
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bsens/chain.hpp"
#include "bsens/dataset.hpp"
#include "bsens/functional.hpp"

namespace bsens {

// ---------------------------------------------------------------------------
// Conjugate test model: x_n ~ N(mu, sigma2), mu ~ N(mu0, tau2).
struct NormalNormalModel {
  double sigma2 = 1.0;  // observation variance, known
  double mu0 = 0.0;     // prior mean (hyperparameter)
  double tau2 = 1.0;    // prior variance

  NormalNormalModel() = default;
  NormalNormalModel(double sigma2_, double mu0_, double tau2_);
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// ---------------------------------------------------------------------------
// Truncated DP mixture with independent Beta(1, alpha) sticks. v_K == 1 by the
// truncation convention, so only v_1..v_{K-1} carry prior density.
struct TruncatedDPMixtureModel {
  int K = 20;                  // truncation level
  double alpha = 1.0;          // DP concentration
  double comp_prior_var = 25.0;  // prior variance of component means (mean 0)
  double obs_var = 1.0;          // within-component variance

  TruncatedDPMixtureModel() = default;
  TruncatedDPMixtureModel(int K_, double alpha_, double comp_prior_var_,
                          double obs_var_);
};

struct MixtureState {
  std::vector<double> sticks;      // v in (0,1]^K, sticks[K-1] == 1
  std::vector<double> comp_means;  // K component means
  std::vector<int> assignments;    // z in {0..K-1}^N

  int K() const noexcept { return static_cast<int>(sticks.size()); }
};

// pi_k = v_k * prod_{j<k} (1 - v_j); nonnegative and sums to 1 when v_K == 1.
std::vector<double> stick_weights(std::span<const double> sticks);

// ---------------------------------------------------------------------------
// Stand-in dependent stick prior: logit(v_1..v_d) jointly Gaussian with common
// mean/variance and equicorrelation rho. rho = 0 gives independent sticks;
// rho -> 1 forces a common stick. The density is defined on the open range
// rho in (-1/(d-1), 1) where the correlation matrix stays positive definite;
// the sub-zero extension exists so central finite differences at rho0 = 0 can
// be run. User-facing configs restrict rho to [0, 1).
struct DependentStickPrior {
  double rho = 0.0;
  double base_mean = 0.0;
  double base_var = 1.0;

  DependentStickPrior() = default;
  DependentStickPrior(double rho_, double base_mean_, double base_var_);

  // log density of the free sticks v (each strictly in (0,1)), including the
  // logit Jacobian.
  double log_density(std::span<const double> sticks) const;
  DependentStickPrior with_rho(double new_rho) const;
};

// Truncated mixture under the dependent stick prior. Component and
// observation structure matches TruncatedDPMixtureModel.
struct EsbMixtureModel {
  int K = 10;
  DependentStickPrior stick_prior;
  double comp_prior_var = 25.0;
  double obs_var = 1.0;

  EsbMixtureModel() = default;
  EsbMixtureModel(int K_, DependentStickPrior prior, double comp_prior_var_,
                  double obs_var_);
};

// ---------------------------------------------------------------------------
// Operations

// log-density of one observation given the state. For the mixtures this is
// the marginal mixture density log sum_k pi_k N(x | mu_k, obs_var); the
// observation's own component label is summed out.
double per_point_loglik(const NormalNormalModel& model, double mu, double x);
double per_point_loglik(std::span<const double> sticks,
                        std::span<const double> comp_means, double obs_var,
                        double x);
double per_point_loglik(const TruncatedDPMixtureModel& model,
                        const MixtureState& state, double x);
double per_point_loglik(const EsbMixtureModel& model, const MixtureState& state,
                        double x);

// sum_n w_n * per_point_loglik + log prior. Assignments are auxiliary
// sampler variables and carry no term here.
double weighted_log_joint(const NormalNormalModel& model, double mu,
                          const Dataset& data, const CaseWeights& w);
double weighted_log_joint(const TruncatedDPMixtureModel& model,
                          const MixtureState& state, const Dataset& data,
                          const CaseWeights& w);
double weighted_log_joint(const EsbMixtureModel& model, const MixtureState& state,
                          const Dataset& data, const CaseWeights& w);

// Log prior of the continuous state (sticks + component means).
double log_prior(const NormalNormalModel& model, double mu);
double log_prior(const TruncatedDPMixtureModel& model, const MixtureState& state);
double log_prior(const EsbMixtureModel& model, const MixtureState& state);

// Complete-data log density of point n given its sampled assignment:
// log pi_{z_n} + log N(x_n | mu_{z_n}, obs_var). This is the exact per-point
// derivative of the weighted Gibbs target with respect to w_n, which is what
// weight-perturbation covariances must use for the mixtures.
double complete_data_loglik(const MixtureState& state, double obs_var, double x,
                            int z);

// d log P(zeta, X | alpha) / d alpha = sum_{k<K-1} [1/alpha + log(1-v_k)].
double dlogjoint_dalpha(const TruncatedDPMixtureModel& model,
                        const MixtureState& state);
double dlogjoint_dalpha(double alpha, std::span<const double> sticks);

// d log P(zeta, X | mu0) / d mu0 = (mu - mu0) / tau2.
double dlogjoint_dmu0(const NormalNormalModel& model, double mu);

// Exact analytic rho-derivative of the dependent stick prior's log density.
double dlogstickprior_drho(const DependentStickPrior& prior,
                           std::span<const double> sticks);

// Conjugate posterior of mu under weighted likelihood.
PosteriorMoments exact_posterior(const NormalNormalModel& model,
                                 const Dataset& data, const CaseWeights& w);

// ---------------------------------------------------------------------------
// State/chain plumbing

ChainLayout normal_normal_layout();
ChainLayout mixture_layout(int K, std::size_t N);

MixtureState decode_mixture_state(const StateView& s);
std::vector<double> encode_mixture_state(const MixtureState& state);

// ---------------------------------------------------------------------------
// Functional factories

// Posterior estimate of the data density at x_star: sum_k pi_k N(x*|mu_k).
Functional make_predictive_density_functional(double obs_var, double x_star);
// Number of distinct assignments among points with nonzero weight.
Functional make_occupied_clusters_functional(const CaseWeights& w);
// Score functionals wrapping the analytic derivatives above.
Functional make_dlogjoint_dalpha_functional(const TruncatedDPMixtureModel& model);
Functional make_dlogjoint_dmu0_functional(const NormalNormalModel& model);
Functional make_stick_rho_score_functional(const DependentStickPrior& prior);
// Complete-data per-point score for omega = w_n (mixtures).
Functional make_weight_score_functional(double obs_var, double x_n, std::size_t n);
// Marginal per-point log-likelihood as a functional of the state (mixtures).
Functional make_marginal_loglik_functional(double obs_var, double x_n,
                                           std::size_t n);

}  // namespace bsens
