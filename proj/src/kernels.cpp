// Copyright 2026
// See LICENSE.txt

#include "bsens/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cstdint>

#include "bsens/errors.hpp"

namespace bsens::kernels {

bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

inline std::size_t n_blocks(std::size_t n) { return (n + kBlock - 1) / kBlock; }

inline double block_sum(std::span<const double> x, std::size_t b) {
  const std::size_t lo = b * kBlock;
  const std::size_t hi = std::min(lo + kBlock, x.size());
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i];
  return s;
}

inline double block_centered_dot(std::span<const double> x,
                                 std::span<const double> y, double xc, double yc,
                                 std::size_t b) {
  const std::size_t lo = b * kBlock;
  const std::size_t hi = std::min(lo + kBlock, x.size());
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += (x[i] - xc) * (y[i] - yc);
  return s;
}

inline double combine(const std::vector<double>& partials) {
  double s = 0.0;
  for (double p : partials) s += p;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
namespace serial {

double sum(std::span<const double> x) {
  const std::size_t nb = n_blocks(x.size());
  std::vector<double> partials(nb);
  for (std::size_t b = 0; b < nb; ++b) partials[b] = block_sum(x, b);
  return combine(partials);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InsufficientSamplesError("kernels", "mean of empty series");
  return sum(x) / static_cast<double>(x.size());
}

double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc) {
  if (x.size() != y.size())
    throw DimensionError("kernels", "centered_dot length mismatch");
  const std::size_t nb = n_blocks(x.size());
  std::vector<double> partials(nb);
  for (std::size_t b = 0; b < nb; ++b)
    partials[b] = block_centered_dot(x, y, xc, yc, b);
  return combine(partials);
}

std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f) {
  const std::size_t S = chain.n_draws();
  std::vector<double> out(S);
  for (std::size_t s = 0; s < S; ++s) out[s] = f(chain.state(s));
  return out;
}

std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs) {
  const std::size_t S = chain.n_draws();
  if (phi.size() != S)
    throw DimensionError("kernels", "phi series length != n_draws");
  if (S < 2) throw InsufficientSamplesError("kernels", "need at least 2 draws");
  const double phibar = mean(phi);
  std::vector<double> out(xs.size());
  std::vector<double> col(S);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    for (std::size_t s = 0; s < S; ++s) col[s] = loglik(chain.state(s), xs[n]);
    const double cbar = mean(col);
    out[n] = centered_dot(phi, col, phibar, cbar) / static_cast<double>(S - 1);
  }
  return out;
}

}  // namespace serial

// ---------------------------------------------------------------------------
namespace omp {

double sum(std::span<const double> x) {
  const std::size_t nb = n_blocks(x.size());
  std::vector<double> partials(nb);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b)
    partials[b] = block_sum(x, static_cast<std::size_t>(b));
  return combine(partials);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InsufficientSamplesError("kernels", "mean of empty series");
  return sum(x) / static_cast<double>(x.size());
}

double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc) {
  if (x.size() != y.size())
    throw DimensionError("kernels", "centered_dot length mismatch");
  const std::size_t nb = n_blocks(x.size());
  std::vector<double> partials(nb);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b)
    partials[b] = block_centered_dot(x, y, xc, yc, static_cast<std::size_t>(b));
  return combine(partials);
}

std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f) {
  const std::size_t S = chain.n_draws();
  std::vector<double> out(S);
  std::exception_ptr error;  // callbacks may throw; rethrow outside the region
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(S); ++s) {
    try {
      out[s] = f(chain.state(static_cast<std::size_t>(s)));
    } catch (...) {
#pragma omp critical(bsens_eval_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs) {
  const std::size_t S = chain.n_draws();
  if (phi.size() != S)
    throw DimensionError("kernels", "phi series length != n_draws");
  if (S < 2) throw InsufficientSamplesError("kernels", "need at least 2 draws");
  const double phibar = mean(phi);
  std::vector<double> out(xs.size());
  std::exception_ptr error;
#pragma omp parallel
  {
    std::vector<double> col(S);
#pragma omp for schedule(dynamic)
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(xs.size()); ++n) {
      try {
        for (std::size_t s = 0; s < S; ++s) col[s] = loglik(chain.state(s), xs[n]);
        const double cbar = serial::mean(col);
        out[n] = serial::centered_dot(phi, col, phibar, cbar) /
                 static_cast<double>(S - 1);
      } catch (...) {
#pragma omp critical(bsens_influence_error)
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace omp

// ---------------------------------------------------------------------------
double sum(std::span<const double> x) { return omp::sum(x); }
double mean(std::span<const double> x) { return omp::mean(x); }
double centered_dot(std::span<const double> x, std::span<const double> y,
                    double xc, double yc) {
  return omp::centered_dot(x, y, xc, yc);
}
std::vector<double> eval_over_draws(const SampleChain& chain, const Functional& f) {
  return omp::eval_over_draws(chain, f);
}
std::vector<double> influence_covariances(const SampleChain& chain,
                                          std::span<const double> phi,
                                          const PointLoglik& loglik,
                                          std::span<const double> xs) {
  return omp::influence_covariances(chain, phi, loglik, xs);
}

}  // namespace bsens::kernels
