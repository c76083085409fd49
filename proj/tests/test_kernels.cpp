// Copyright 2026
// See LICENSE.txt
//
// The OpenMP kernels must be bitwise-identical to the serial reference
// implementations regardless of thread count.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"
#include "bsens/models.hpp"

using namespace bsens;

namespace {

SampleChain synthetic_chain(std::size_t S, int K, std::size_t N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> stick(0.05, 0.95);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_int_distribution<int> comp(0, K - 1);
  SampleChain chain(mixture_layout(K, N), seed, "synthetic");
  chain.reserve(S);
  std::vector<double> row(chain.dim());
  for (std::size_t s = 0; s < S; ++s) {
    for (int k = 0; k + 1 < K; ++k) row[static_cast<std::size_t>(k)] = stick(rng);
    row[static_cast<std::size_t>(K - 1)] = 1.0;
    for (int k = 0; k < K; ++k)
      row[static_cast<std::size_t>(K + k)] = normal(rng);
    for (std::size_t n = 0; n < N; ++n)
      row[2 * static_cast<std::size_t>(K) + n] = static_cast<double>(comp(rng));
    chain.append(row);
  }
  return chain;
}

}  // namespace

TEST_CASE("blocked reductions: serial and omp agree bitwise") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(1.0, 4.0);
  // sizes straddling several block boundaries
  for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{4096},
                        std::size_t{4097}, std::size_t{50000}}) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = normal(rng) * 0.3;
    }
    CHECK(kernels::serial::sum(x) == kernels::omp::sum(x));
    CHECK(kernels::serial::mean(x) == kernels::omp::mean(x));
    const double xb = kernels::serial::mean(x);
    const double yb = kernels::serial::mean(y);
    CHECK(kernels::serial::centered_dot(x, y, xb, yb) ==
          kernels::omp::centered_dot(x, y, xb, yb));
  }
}

TEST_CASE("functional evaluation: serial and omp agree bitwise") {
  const auto chain = synthetic_chain(10007, 6, 9, 12);
  const auto phi = make_predictive_density_functional(1.0, 0.4);
  const auto a = kernels::serial::eval_over_draws(chain, phi);
  const auto b = kernels::omp::eval_over_draws(chain, phi);
  CHECK(a == b);
}

TEST_CASE("influence kernel: serial and omp agree bitwise") {
  const auto chain = synthetic_chain(4111, 5, 6, 99);
  const auto phi = make_predictive_density_functional(1.0, -0.3);
  const auto phis = kernels::serial::eval_over_draws(chain, phi);
  const std::vector<double> xs{-2.0, -0.5, 0.0, 0.5, 1.5, 3.0};
  const kernels::PointLoglik loglik = [](const StateView& st, double x) {
    return per_point_loglik(st.block("sticks"), st.block("comp_means"), 1.0, x);
  };
  const auto a = kernels::serial::influence_covariances(chain, phis, loglik, xs);
  const auto b = kernels::omp::influence_covariances(chain, phis, loglik, xs);
  CHECK(a == b);
}

TEST_CASE("mean rejects empty input") {
  CHECK_THROWS(kernels::mean(std::vector<double>{}));
}

TEST_CASE("callback exceptions propagate out of the parallel kernels") {
  const auto chain = synthetic_chain(2048, 3, 2, 1);
  const Functional bomb{"bomb", [](const StateView& s) -> double {
                          if (s.block("sticks")[0] > 0.0)
                            throw DimensionError("test", "boom");
                          return 0.0;
                        }};
  CHECK_THROWS_AS(kernels::omp::eval_over_draws(chain, bomb), DimensionError);

  const std::vector<double> phis(2048, 1.0);
  const std::vector<double> xs{0.0};
  const kernels::PointLoglik bad = [](const StateView&, double) -> double {
    throw DimensionError("test", "boom");
  };
  CHECK_THROWS_AS(kernels::omp::influence_covariances(chain, phis, bad, xs),
                  DimensionError);
}
