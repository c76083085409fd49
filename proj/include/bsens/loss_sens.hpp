// Copyright 2026
// See LICENSE.txt
//
// Bayes estimators under a loss, their sensitivity to a perturbation of the
// loss along L + omega * Delta, and the mean-to-median special case evaluated
// in exact indicator form.

#pragma once
#include <functional>
#include <string>

#include "bsens/chain.hpp"
#include "bsens/functional.hpp"

namespace bsens {

// Base loss with first and second theta-derivatives and a perturbation with a
// first theta-derivative. Arguments are (draw value, theta).
struct LossSpec {
  std::string name;
  std::function<double(double, double)> base_d1;
  std::function<double(double, double)> base_d2;
  std::function<double(double, double)> delta_d1;
};

struct BayesEstimate {
  double theta_hat = 0.0;
  double expected_loss_grad_residual = 0.0;
};

// L = (zeta - theta)^2 / 2; the estimator is the posterior mean.
LossSpec squared_loss();
// |zeta - theta| with a Huber transition of the given width (solver needs a
// second derivative); the estimator approaches the posterior median.
LossSpec smoothed_absolute_loss(double width);
// Pinball loss at quantile tau, smoothed across a window of the given width.
LossSpec smoothed_pinball_loss(double tau, double width);
// L = squared loss, Delta = |zeta - theta| - L: the path from mean to median.
// Delta's derivative uses exact indicators, matching the closed form of the
// mean-median approximation.
LossSpec mean_to_median_loss();

// Solves the estimating equation E[dL/dtheta] = 0 over the chain by
// safeguarded Newton (bisection fallback) on [min draw, max draw].
BayesEstimate bayes_estimator(const SampleChain& chain, const Functional& phi,
                              const LossSpec& loss);

// dtheta_hat/domega at omega = 0: -(E[d2L])^{-1} E[dDelta] at theta_hat.
double loss_sensitivity(const SampleChain& chain, const Functional& phi,
                        const LossSpec& loss);
// Same with theta_hat supplied externally (e.g. pinned to the sample mean for
// the indicator-form identity).
double loss_sensitivity_at(const SampleChain& chain, const Functional& phi,
                           const LossSpec& loss, double theta_hat);

// E[1{zeta > mean}] - E[1{zeta < mean}]; draws equal to the mean count in
// neither. First-order approximation to Median - Mean.
double mean_median_approx(const SampleChain& chain, const Functional& phi);

}  // namespace bsens
