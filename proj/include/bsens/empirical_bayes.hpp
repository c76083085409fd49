// Copyright 2026
// See LICENSE.txt
//
// Empirical Bayes for the DP concentration: solve G(alpha, m(alpha, omega)) = 0
// with G(alpha, m) = sum_{n=1}^N alpha/(alpha+n-1) - m and m the posterior mean
// of the occupied-cluster count, then assemble the full chain-rule derivative
// of a posterior expectation through both the direct omega dependence and the
// implicit dependence of the fitted alpha.

#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bsens/chain.hpp"
#include "bsens/dataset.hpp"
#include "bsens/functional.hpp"
#include "bsens/models.hpp"
#include "bsens/oracle.hpp"
#include "bsens/sampler.hpp"
#include "bsens/sensitivity.hpp"

namespace bsens {

// G(alpha, m) = sum_{n=1}^N alpha/(alpha+n-1) - m
double cluster_count_G(double alpha, double m, std::int64_t N);
// dG/dalpha at fixed m: sum_n (n-1)/(alpha+n-1)^2
double dG_dalpha(double alpha, std::int64_t N);
constexpr double dG_dm() { return -1.0; }

struct EBSolverConfig {
  double bracket_lo = 1e-3;
  double bracket_hi = 1e3;
  double tol = 0.05;               // |G| stopping tolerance
  double rel_bracket = 1e-3;       // bracket width < rel_bracket * alpha stop
  std::int64_t max_iterations = 200;
  bool common_random_numbers = true;  // shared seed across candidate-alpha chains
};

struct EBSolution {
  double alpha_hat = 0.0;
  double residual = 0.0;  // |G(alpha_hat, m(alpha_hat, omega))|
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double m_hat = 0.0;       // posterior mean cluster count at alpha_hat
  double m_se = 0.0;        // its batch-means standard error
  std::vector<std::array<double, 3>> trace;  // (alpha, m, G) per evaluation
};

EBSolution solve_eb(const TruncatedDPMixtureModel& model, const Dataset& data,
                    const CaseWeights& w, const SamplerConfig& sampler_config,
                    const EBSolverConfig& solver_config);

// Scalar hyperparameter the EB derivative is taken in.
struct OmegaSpec {
  enum class Kind { case_weight, comp_prior_mean };
  Kind kind = Kind::case_weight;
  std::size_t weight_index = 0;

  static OmegaSpec case_weight(std::size_t n) {
    return {Kind::case_weight, n};
  }
  static OmegaSpec comp_prior_mean() { return {Kind::comp_prior_mean, 0}; }
};

// Every factor of the chain-rule derivative, exposed for auditing.
// total = direct_term + indirect_term holds by construction.
struct EBDerivativeBreakdown {
  double total = 0.0;
  double total_se = 0.0;
  double direct_term = 0.0;
  double indirect_term = 0.0;
  double dalpha_domega = 0.0;
  double dG_dalpha_total = 0.0;
  double dG_dm = -1.0;
  SensitivityEstimate dm_dalpha;
  SensitivityEstimate dm_domega;
  SensitivityEstimate cov_phi_score_alpha;
  SensitivityEstimate cov_phi_score_omega;
};

EBDerivativeBreakdown eb_sensitivity(const SampleChain& chain_at_solution,
                                     const Functional& phi, const Functional& F,
                                     const TruncatedDPMixtureModel& model_at_alpha_hat,
                                     const Dataset& data, const CaseWeights& w,
                                     const OmegaSpec& omega);

// One full EB pipeline evaluation at the given weights: solve for alpha, run
// an expectation chain at the solution, return E[phi] with a standard error
// that folds the solver's alpha noise through the implicit-function slope.
// This is the unit the finite-difference oracle perturbs.
PipelineValue eb_refit_expectation(const TruncatedDPMixtureModel& model,
                                   const Dataset& data, const CaseWeights& w,
                                   const SamplerConfig& solver_chains,
                                   const SamplerConfig& expectation_chain,
                                   const EBSolverConfig& solver_config,
                                   const Functional& phi, std::uint64_t seed);

}  // namespace bsens
