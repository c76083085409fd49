// Copyright 2026
// See LICENSE.txt
//
// Times the serial reference kernels against the OpenMP ones on a synthetic
// chain and checks they agree bitwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "bsens/kernels.hpp"
#include "bsens/models.hpp"

using namespace bsens;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_ms(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

}  // namespace

int main() {
  const std::size_t S = 200000;
  const int K = 10;
  const std::size_t N = 40;

  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  SampleChain chain(mixture_layout(K, N), 7, "bench");
  chain.reserve(S);
  std::vector<double> row(chain.dim());
  for (std::size_t s = 0; s < S; ++s) {
    for (int k = 0; k < K - 1; ++k) row[static_cast<std::size_t>(k)] = unif(rng);
    row[static_cast<std::size_t>(K - 1)] = 1.0;
    for (int k = 0; k < K; ++k)
      row[static_cast<std::size_t>(K + k)] = 5.0 * normal(rng);
    for (std::size_t n = 0; n < N; ++n)
      row[2 * static_cast<std::size_t>(K) + n] =
          static_cast<double>(s % static_cast<std::size_t>(K));
    chain.append(row);
  }

  std::vector<double> xs(N);
  for (std::size_t n = 0; n < N; ++n) xs[n] = normal(rng) * 4.0;

  const auto phi = make_predictive_density_functional(1.0, 0.5);
  const kernels::PointLoglik loglik = [](const StateView& st, double x) {
    return per_point_loglik(st.block("sticks"), st.block("comp_means"), 1.0, x);
  };

  std::printf("kernel benchmark: S=%zu draws, K=%d, N=%zu, threads=%d (openmp %s)\n",
              S, K, N, kernels::max_threads(),
              kernels::openmp_enabled() ? "on" : "off");
  std::printf("%-24s %12s %12s %9s %s\n", "kernel", "serial (ms)", "omp (ms)",
              "speedup", "bitwise");

  {
    const auto serial = kernels::serial::eval_over_draws(chain, phi);
    const auto parallel = kernels::omp::eval_over_draws(chain, phi);
    const double ts = time_ms([&] { kernels::serial::eval_over_draws(chain, phi); }, 3);
    const double tp = time_ms([&] { kernels::omp::eval_over_draws(chain, phi); }, 3);
    std::printf("%-24s %12.2f %12.2f %8.2fx %s\n", "eval_over_draws", ts, tp,
                ts / tp, serial == parallel ? "equal" : "DIFFER");
  }
  {
    const auto f = kernels::serial::eval_over_draws(chain, phi);
    const double fb = kernels::serial::mean(f);
    const double serial = kernels::serial::centered_dot(f, f, fb, fb);
    const double parallel = kernels::omp::centered_dot(f, f, fb, fb);
    const double ts =
        time_ms([&] { kernels::serial::centered_dot(f, f, fb, fb); }, 10);
    const double tp = time_ms([&] { kernels::omp::centered_dot(f, f, fb, fb); }, 10);
    std::printf("%-24s %12.3f %12.3f %8.2fx %s\n", "centered_dot", ts, tp, ts / tp,
                serial == parallel ? "equal" : "DIFFER");
  }
  {
    const auto f = kernels::serial::eval_over_draws(chain, phi);
    const auto serial = kernels::serial::influence_covariances(chain, f, loglik, xs);
    const auto parallel = kernels::omp::influence_covariances(chain, f, loglik, xs);
    const double ts = time_ms(
        [&] { kernels::serial::influence_covariances(chain, f, loglik, xs); }, 2);
    const double tp = time_ms(
        [&] { kernels::omp::influence_covariances(chain, f, loglik, xs); }, 2);
    std::printf("%-24s %12.1f %12.1f %8.2fx %s\n", "influence_covariances", ts, tp,
                ts / tp, serial == parallel ? "equal" : "DIFFER");
  }
  return 0;
}
