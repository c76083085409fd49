// Copyright 2026
// See LICENSE.txt

#pragma once
#include <span>

#include "bsens/chain.hpp"
#include "bsens/functional.hpp"

namespace bsens {

// Effective sample size via the initial-positive-sequence truncation of the
// autocorrelation sum. Constant series are defined to have ESS = S. Result is
// clamped to [1, S].
double ess(const SampleChain& chain, const Functional& f);
double ess_series(std::span<const double> y);

// Monte Carlo standard error of the series mean by non-overlapping batch
// means with floor(sqrt(S)) batches. Reduces to sd/sqrt(S) for i.i.d. draws.
double mcse_batch_means(std::span<const double> y);

}  // namespace bsens
