// Copyright 2026
// See LICENSE.txt

#include "bsens/loss_sens.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"

namespace bsens {

LossSpec squared_loss() {
  return {"squared",
          [](double z, double th) { return th - z; },
          [](double, double) { return 1.0; },
          [](double, double) { return 0.0; }};
}

LossSpec smoothed_absolute_loss(double width) {
  if (!(width > 0.0))
    throw DomainError("loss_sens.spec", "smoothing width must be > 0");
  auto d1 = [width](double z, double th) {
    return std::clamp((th - z) / width, -1.0, 1.0);
  };
  auto d2 = [width](double z, double th) {
    return std::abs(th - z) <= width ? 1.0 / width : 0.0;
  };
  return {"absolute_huber", d1, d2, [](double, double) { return 0.0; }};
}

LossSpec smoothed_pinball_loss(double tau, double width) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw DomainError("loss_sens.spec", "tau must be in (0,1)");
  if (!(width > 0.0))
    throw DomainError("loss_sens.spec", "smoothing width must be > 0");
  // d1 ramps from -tau (theta far below zeta) to 1-tau (far above).
  auto d1 = [tau, width](double z, double th) {
    const double r = th - z;
    if (r <= -width) return -tau;
    if (r >= width) return 1.0 - tau;
    return -tau + (r + width) / (2.0 * width);
  };
  auto d2 = [width](double z, double th) {
    return std::abs(th - z) < width ? 1.0 / (2.0 * width) : 0.0;
  };
  return {"pinball", d1, d2, [](double, double) { return 0.0; }};
}

LossSpec mean_to_median_loss() {
  auto sq = squared_loss();
  // d/dtheta (|z - th| - L) = 1{z < th} - 1{z > th} - (th - z)
  auto delta_d1 = [](double z, double th) {
    double ind = 0.0;
    if (z < th) ind = 1.0;
    else if (z > th) ind = -1.0;
    return ind - (th - z);
  };
  return {"mean_to_median", sq.base_d1, sq.base_d2, delta_d1};
}

namespace {

std::vector<double> draws_of(const SampleChain& chain, const Functional& phi) {
  if (chain.n_draws() == 0)
    throw InsufficientSamplesError("loss_sens", "empty chain");
  return kernels::eval_over_draws(chain, phi);
}

double mean_d(const std::vector<double>& draws,
              const std::function<double(double, double)>& d, double theta) {
  std::vector<double> vals(draws.size());
  for (std::size_t s = 0; s < draws.size(); ++s) vals[s] = d(draws[s], theta);
  return kernels::mean(vals);
}

}  // namespace

BayesEstimate bayes_estimator(const SampleChain& chain, const Functional& phi,
                              const LossSpec& loss) {
  const auto draws = draws_of(chain, phi);
  double lo = *std::min_element(draws.begin(), draws.end());
  double hi = *std::max_element(draws.begin(), draws.end());
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  const double tol = 1e-10 * scale;

  double g_lo = mean_d(draws, loss.base_d1, lo);
  double g_hi = mean_d(draws, loss.base_d1, hi);
  if (g_lo == 0.0) return {lo, 0.0};
  if (g_hi == 0.0) return {hi, 0.0};
  if (g_lo > 0.0 || g_hi < 0.0)
    throw BracketError("loss_sens.bayes_estimator",
                       "estimating equation has no root in [min draw, max draw]");

  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = mean_d(draws, loss.base_d1, theta);
    if (std::abs(g) <= tol) return {theta, g};
    const double h = mean_d(draws, loss.base_d2, theta);
    if (h < 0.0)
      throw ConvexityError("loss_sens.bayes_estimator",
                           "expected loss is locally concave at the iterate");
    // keep the bracket
    if (g < 0.0) lo = theta;
    else hi = theta;
    double next = h > 0.0 ? theta - g / h : theta;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisect fallback
    if (next == theta) {
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
        return {theta, g};
      next = 0.5 * (lo + hi);
    }
    theta = next;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
      return {theta, mean_d(draws, loss.base_d1, theta)};
  }
  const double g = mean_d(draws, loss.base_d1, theta);
  if (std::abs(g) <= 1e3 * tol) return {theta, g};
  throw BracketError("loss_sens.bayes_estimator",
                     "Newton/bisection failed to satisfy the estimating equation");
}

double loss_sensitivity_at(const SampleChain& chain, const Functional& phi,
                           const LossSpec& loss, double theta_hat) {
  const auto draws = draws_of(chain, phi);
  const double curvature = mean_d(draws, loss.base_d2, theta_hat);
  const double scale = std::max(1.0, std::abs(theta_hat));
  if (std::abs(curvature) < 1e-12 * scale)
    throw SingularityError("loss_sens.sensitivity",
                           "posterior expected curvature is numerically zero", 0);
  const double delta_grad = mean_d(draws, loss.delta_d1, theta_hat);
  return -delta_grad / curvature;
}

double loss_sensitivity(const SampleChain& chain, const Functional& phi,
                        const LossSpec& loss) {
  const auto est = bayes_estimator(chain, phi, loss);
  return loss_sensitivity_at(chain, phi, loss, est.theta_hat);
}

double mean_median_approx(const SampleChain& chain, const Functional& phi) {
  const auto draws = draws_of(chain, phi);
  const double mean = kernels::mean(draws);
  std::vector<double> ind(draws.size());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    if (draws[s] > mean) ind[s] = 1.0;
    else if (draws[s] < mean) ind[s] = -1.0;
    else ind[s] = 0.0;
  }
  return kernels::mean(ind);
}

}  // namespace bsens
