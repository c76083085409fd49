// Copyright 2026
// See LICENSE.txt

#include "bsens/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"

namespace bsens {

double ess_series(std::span<const double> y) {
  const std::size_t S = y.size();
  if (S < 10)
    throw InsufficientSamplesError("diagnostics.ess", "need at least 10 draws");
  const double ybar = kernels::mean(y);

  auto gamma = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t i = 0; i + t < S; ++i)
      s += (y[i] - ybar) * (y[i + t] - ybar);
    return s / static_cast<double>(S);
  };

  const double g0 = gamma(0);
  if (g0 <= 0.0) return static_cast<double>(S);  // constant series convention

  // Geyer initial positive sequence: sum paired autocovariances while positive.
  // The lag scan is capped; chains with longer memory than this are clamped
  // rather than scanned quadratically.
  const std::size_t max_lag = std::min(S - 1, static_cast<std::size_t>(2000));
  double tau = -g0;
  for (std::size_t m = 0; 2 * m + 1 <= max_lag; ++m) {
    const double pair = gamma(2 * m) + gamma(2 * m + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(S) * g0 / tau;
  return std::clamp(ess, 1.0, static_cast<double>(S));
}

double ess(const SampleChain& chain, const Functional& f) {
  const auto series = kernels::eval_over_draws(chain, f);
  return ess_series(series);
}

double mcse_batch_means(std::span<const double> y) {
  const std::size_t S = y.size();
  if (S < 4)
    throw InsufficientSamplesError("diagnostics.mcse", "need at least 4 draws");
  const auto B = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(S))));
  const std::size_t L = S / B;
  const std::size_t used = B * L;

  std::vector<double> means(B);
  for (std::size_t b = 0; b < B; ++b)
    means[b] = kernels::mean(y.subspan(b * L, L));
  const double grand = kernels::mean(means);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_of_mean =
      static_cast<double>(L) * ss / static_cast<double>(B - 1) /
      static_cast<double>(used);
  return std::sqrt(var_of_mean);
}

}  // namespace bsens
