// Copyright 2026
// See LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"
#include "bsens/loss_sens.hpp"

using namespace bsens;

namespace {

const Functional kValue = make_coordinate_functional("value", 0, "value");

SampleChain normal_chain(std::size_t S, std::uint64_t seed, double mean = 0.0,
                         double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> draws(S);
  for (auto& v : draws) v = normal(rng);
  return make_scalar_chain(std::move(draws), "value");
}

SampleChain exponential_chain(std::size_t S, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> draws(S);
  for (auto& v : draws) v = expo(rng);
  return make_scalar_chain(std::move(draws), "value");
}

double sample_sd(const std::vector<double>& y) {
  const double m = kernels::mean(y);
  return std::sqrt(kernels::centered_dot(y, y, m, m) /
                   static_cast<double>(y.size() - 1));
}

double direct_quantile(std::vector<double> y, double q) {
  std::sort(y.begin(), y.end());
  const double idx = q * static_cast<double>(y.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = static_cast<std::size_t>(std::ceil(idx));
  const double frac = idx - std::floor(idx);
  return y[lo] * (1.0 - frac) + y[hi] * frac;
}

}  // namespace

TEST_CASE("squared loss recovers the sample mean") {
  const auto chain = normal_chain(20000, 3, 0.7, 2.0);
  const auto series = kernels::eval_over_draws(chain, kValue);
  const auto est = bayes_estimator(chain, kValue, squared_loss());
  CHECK(est.theta_hat ==
        doctest::Approx(kernels::mean(series)).epsilon(1e-12));
  CHECK(std::abs(est.expected_loss_grad_residual) < 1e-9);
}

TEST_CASE("smoothed absolute loss recovers the sample median") {
  const auto chain = normal_chain(10001, 7, -0.4, 1.3);
  auto series = kernels::eval_over_draws(chain, kValue);
  const double width = 1e-6 * sample_sd(series);
  const auto est = bayes_estimator(chain, kValue, smoothed_absolute_loss(width));
  const double median = direct_quantile(series, 0.5);
  CHECK(est.theta_hat == doctest::Approx(median).epsilon(1e-4));
}

TEST_CASE("smoothed pinball loss recovers the 0.9 quantile") {
  const auto chain = normal_chain(10001, 11, 0.0, 1.0);
  auto series = kernels::eval_over_draws(chain, kValue);
  const double width = 1e-6 * sample_sd(series);
  const auto est =
      bayes_estimator(chain, kValue, smoothed_pinball_loss(0.9, width));
  const double q90 = direct_quantile(series, 0.9);
  CHECK(est.theta_hat == doctest::Approx(q90).epsilon(1e-3));
}

TEST_CASE("loss sensitivity: degenerate perturbations") {
  const auto chain = normal_chain(5000, 13);

  SUBCASE("delta identical to the base loss gives ~0") {
    LossSpec self = squared_loss();
    self.delta_d1 = self.base_d1;  // estimating equation already solved
    CHECK(std::abs(loss_sensitivity(chain, kValue, self)) < 1e-9);
  }

  SUBCASE("theta-free delta gives exactly 0") {
    LossSpec flat = squared_loss();
    flat.delta_d1 = [](double, double) { return 0.0; };
    CHECK(loss_sensitivity(chain, kValue, flat) == 0.0);
  }
}

TEST_CASE("mean-to-median path equals the indicator form to 1e-12") {
  const auto chain = exponential_chain(50001, 17);
  const auto series = kernels::eval_over_draws(chain, kValue);
  const double mean = kernels::mean(series);

  const double via_loss =
      loss_sensitivity_at(chain, kValue, mean_to_median_loss(), mean);
  const double via_indicators = mean_median_approx(chain, kValue);
  CHECK(via_loss == doctest::Approx(via_indicators).epsilon(1e-12));
  CHECK(std::abs(via_loss - via_indicators) < 1e-12);
}

TEST_CASE("mean-median approximation on known distributions") {
  SUBCASE("symmetric posterior gives ~0") {
    const auto chain = normal_chain(100000, 19);
    const double est = mean_median_approx(chain, kValue);
    CHECK(std::abs(est) < 3.0 * 2.0 / std::sqrt(100000.0));
  }

  SUBCASE("exponential: estimate matches 2/e - 1, not the true gap") {
    const auto chain = exponential_chain(100000, 23);
    const double est = mean_median_approx(chain, kValue);
    const double truth = 2.0 * std::exp(-1.0) - 1.0;     // -0.264241
    const double true_gap = std::log(2.0) - 1.0;          // -0.306853
    CHECK(std::abs(est - truth) < 3.0 * 2.0 / std::sqrt(100000.0));
    // the linearization gap is real and documented
    CHECK(std::abs(est - true_gap) > 0.02);
  }

  SUBCASE("right-skew is negative, mirrored chain is its negation") {
    const auto chain = exponential_chain(20000, 29);
    const auto series = kernels::eval_over_draws(chain, kValue);
    std::vector<double> negated(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) negated[i] = -series[i];
    const auto mirrored = make_scalar_chain(negated, "value");
    const double right = mean_median_approx(chain, kValue);
    const double left = mean_median_approx(mirrored, kValue);
    CHECK(right < 0.0);
    CHECK(left == -right);  // exact antisymmetry
  }
}

TEST_CASE("mean-median approximation: shift equivariance on dyadic draws") {
  // draws on a dyadic grid keep the shifted sums exact in floating point
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> grid(-2048, 2048);
  std::vector<double> draws(4096);
  for (auto& v : draws) v = static_cast<double>(grid(rng)) / 1024.0;
  const auto chain = make_scalar_chain(draws, "value");

  std::vector<double> shifted(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) shifted[i] = draws[i] + 8.0;
  const auto shifted_chain = make_scalar_chain(shifted, "value");

  CHECK(mean_median_approx(chain, kValue) ==
        mean_median_approx(shifted_chain, kValue));
}

TEST_CASE("bayes estimator error paths") {
  SUBCASE("concave loss raises a convexity error") {
    const auto chain = normal_chain(200, 37);
    LossSpec concave{"concave",
                     [](double z, double th) { return -(th - z); },
                     [](double, double) { return -1.0; },
                     [](double, double) { return 0.0; }};
    CHECK_THROWS_AS(bayes_estimator(chain, kValue, concave), Error);
  }

  SUBCASE("gradient without a root in the draw range raises a bracket error") {
    const auto chain = normal_chain(200, 41);
    LossSpec shifted{"shifted",
                     [](double, double) { return 1.0; },  // never zero
                     [](double, double) { return 0.0; },
                     [](double, double) { return 0.0; }};
    CHECK_THROWS_AS(bayes_estimator(chain, kValue, shifted), BracketError);
  }

  SUBCASE("zero curvature at theta_hat raises a singularity error") {
    const auto chain = normal_chain(200, 43);
    LossSpec flat = squared_loss();
    flat.base_d2 = [](double, double) { return 0.0; };
    flat.delta_d1 = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(loss_sensitivity_at(chain, kValue, flat, 0.0),
                    SingularityError);
  }

  SUBCASE("empty chain is rejected") {
    ChainLayout layout{{{"value", 0, 1}}};
    SampleChain chain(layout, 0, "empty");
    CHECK_THROWS_AS(bayes_estimator(chain, kValue, squared_loss()),
                    InsufficientSamplesError);
  }
}
