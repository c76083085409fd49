// Copyright 2026
// See LICENSE.txt

#include "bsens/sensitivity.hpp"

#include <cmath>
#include <vector>

#include "bsens/diagnostics.hpp"
#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"

namespace bsens {

SensitivityEstimate posterior_cov_series(std::span<const double> f,
                                         std::span<const double> g) {
  if (f.size() != g.size())
    throw DimensionError("sensitivity.posterior_cov", "series length mismatch");
  const std::size_t S = f.size();
  if (S < 2)
    throw InsufficientSamplesError("sensitivity.posterior_cov",
                                   "need at least 2 draws");
  const double fbar = kernels::mean(f);
  const double gbar = kernels::mean(g);

  SensitivityEstimate est;
  est.n_draws = static_cast<std::int64_t>(S);
  est.value = kernels::centered_dot(f, g, fbar, gbar) / static_cast<double>(S - 1);
  if (!std::isfinite(est.value))
    throw NumericError("sensitivity.posterior_cov", "non-finite covariance", 0);

  // Batch means on the product-deviation series; the covariance is its mean
  // up to the S/(S-1) factor.
  std::vector<double> prod(S);
  for (std::size_t s = 0; s < S; ++s) prod[s] = (f[s] - fbar) * (g[s] - gbar);
  if (S >= 4) {
    est.mc_se = mcse_batch_means(prod);
    const double iid_var =
        kernels::centered_dot(prod, prod, kernels::mean(prod), kernels::mean(prod)) /
        static_cast<double>(S - 1);
    const double bm_var = est.mc_se * est.mc_se * static_cast<double>(S);
    est.ess_used = bm_var > 0.0
                       ? std::min(static_cast<double>(S),
                                  static_cast<double>(S) * iid_var / bm_var)
                       : static_cast<double>(S);
  } else {
    est.mc_se = 0.0;
    est.ess_used = static_cast<double>(S);
  }
  return est;
}

SensitivityEstimate posterior_cov(const SampleChain& chain, const Functional& f,
                                  const Functional& g) {
  const auto fs = kernels::eval_over_draws(chain, f);
  const auto gs = kernels::eval_over_draws(chain, g);
  return posterior_cov_series(fs, gs);
}

SensitivityEstimate hyper_sensitivity(const SampleChain& chain, const Functional& phi,
                                      const Functional& dlogjoint) {
  return posterior_cov(chain, phi, dlogjoint);
}

namespace {

InfluenceVector case_influence_impl(const SampleChain& chain, const Functional& phi,
                                    const Dataset& data,
                                    const kernels::PointLoglik& loglik) {
  const auto phis = kernels::eval_over_draws(chain, phi);
  InfluenceVector out;
  out.per_point =
      kernels::influence_covariances(chain, phis, loglik, data.points);
  for (std::size_t n = 0; n < out.per_point.size(); ++n)
    if (!std::isfinite(out.per_point[n]))
      throw NumericError("sensitivity.case_influence", "non-finite influence", n);
  return out;
}

}  // namespace

InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data, const NormalNormalModel& model) {
  return case_influence_impl(chain, phi, data,
                             [&model](const StateView& s, double x) {
                               return per_point_loglik(model, s.scalar("mu"), x);
                             });
}

InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data,
                               const TruncatedDPMixtureModel& model) {
  const double obs_var = model.obs_var;
  return case_influence_impl(chain, phi, data,
                             [obs_var](const StateView& s, double x) {
                               return per_point_loglik(s.block("sticks"),
                                                       s.block("comp_means"),
                                                       obs_var, x);
                             });
}

InfluenceVector case_influence(const SampleChain& chain, const Functional& phi,
                               const Dataset& data, const EsbMixtureModel& model) {
  const double obs_var = model.obs_var;
  return case_influence_impl(chain, phi, data,
                             [obs_var](const StateView& s, double x) {
                               return per_point_loglik(s.block("sticks"),
                                                       s.block("comp_means"),
                                                       obs_var, x);
                             });
}

SensitivityEstimate esb_rho_sensitivity(const SampleChain& chain,
                                        const Functional& phi,
                                        const DependentStickPrior& prior) {
  const std::size_t S = chain.n_draws();
  std::vector<double> scores(S);
  for (std::size_t s = 0; s < S; ++s) {
    auto sticks = chain.state(s).block("sticks");
    auto free = sticks.subspan(0, sticks.size() - 1);
    for (double v : free)
      if (!(v > 0.0) || !(v < 1.0))
        throw SingularityError("sensitivity.esb_rho",
                               "stick on the boundary in draw", s);
    scores[s] = dlogstickprior_drho(prior, free);
  }
  const auto phis = kernels::eval_over_draws(chain, phi);
  return posterior_cov_series(phis, scores);
}

double linear_extrapolate(double base_expectation, const SensitivityEstimate& est,
                          double delta_omega) {
  return base_expectation + est.value * delta_omega;
}

}  // namespace bsens
