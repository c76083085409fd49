// Copyright 2026
// See LICENSE.txt
//
// Hot loops behind the estimators: functional evaluation over draws and
// blocked reductions. Each kernel has a serial reference implementation and
// an OpenMP one with identical floating-point behavior: reductions sum fixed
// 4096-element blocks serially and combine the block partials in index order,
// so results are bitwise equal regardless of thread count. The serial
// variants are kept as the test oracle and for the benchmark target.

#pragma once
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bsens/chain.hpp"
#include "bsens/functional.hpp"

namespace bsens::kernels {

inline constexpr std::size_t kBlock = 4096;

bool openmp_enabled() noexcept;
int max_threads() noexcept;

// Per-point log density callback used by the influence kernel: (draw, x_n).
using PointLoglik = std::function<double(const StateView&, double)>;

namespace serial {
double sum(std::span<const double> x);
double mean(std::span<const double> x);
// sum over s of (x_s - xc)*(y_s - yc)
double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc);
std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f);
// out[n] = centered dot of phi deviations against loglik(state_s, x[n]) deviations,
// divided by (S-1).
std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs);
}  // namespace serial

namespace omp {
double sum(std::span<const double> x);
double mean(std::span<const double> x);
double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc);
std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f);
std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs);
}  // namespace omp

// Default entry points used by the library (OpenMP build when available).
double sum(std::span<const double> x);
double mean(std::span<const double> x);
double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc);
std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f);
std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs);

}  // namespace bsens::kernels
