// Copyright 2026
// See LICENSE.txt

#include "bsens/oracle.hpp"

#include <cmath>
#include <future>
#include <limits>

#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"

namespace bsens {

PipelineValue fd_derivative(const Pipeline& pipeline, double omega0,
                            const FDSpec& spec) {
  if (!(spec.step > 0.0)) throw DomainError("oracle.fd", "step must be > 0");
  const std::uint64_t seed_minus =
      spec.common_seed ? spec.seed_plus : spec.seed_minus;
  const bool central = spec.scheme == FDSpec::Scheme::central;
  const double at_lo = central ? omega0 - spec.step : omega0;
  const double denom = central ? 2.0 * spec.step : spec.step;

  // the two refits are independent; run them concurrently
  auto up_future = std::async(std::launch::async, [&] {
    return pipeline(omega0 + spec.step, spec.seed_plus);
  });
  const PipelineValue dn = pipeline(at_lo, seed_minus);
  const PipelineValue up = up_future.get();

  PipelineValue out;
  out.value = (up.value - dn.value) / denom;
  out.se = std::sqrt(up.se * up.se + dn.se * dn.se) / denom;
  return out;
}

namespace {

template <typename Model, typename Sampler>
double drop_one_impl(const Model& model, const Dataset& data,
                     const CaseWeights& w_base, std::size_t n,
                     const SamplerConfig& config, const Functional& phi,
                     Sampler&& sampler) {
  if (n >= data.size())
    throw DimensionError("oracle.refit_drop_one", "point index out of range");
  CaseWeights w = w_base;
  w.check_matches(data.size(), "oracle.refit_drop_one");
  w[n] = 0.0;
  const auto chain = sampler(model, data, w, config);
  return kernels::mean(kernels::eval_over_draws(chain, phi));
}

}  // namespace

double refit_drop_one(const NormalNormalModel& model, const Dataset& data,
                      const CaseWeights& w_base, std::size_t n,
                      const SamplerConfig& config, const Functional& phi) {
  return drop_one_impl(model, data, w_base, n, config, phi,
                       [](const auto& m, const auto& d, const auto& w,
                          const auto& c) { return gibbs_normal_normal(m, d, w, c); });
}

double refit_drop_one(const TruncatedDPMixtureModel& model, const Dataset& data,
                      const CaseWeights& w_base, std::size_t n,
                      const SamplerConfig& config, const Functional& phi) {
  return drop_one_impl(model, data, w_base, n, config, phi,
                       [](const auto& m, const auto& d, const auto& w,
                          const auto& c) { return gibbs_dp_mixture(m, d, w, c); });
}

ComparisonReport compare(double linear, double linear_se, double oracle,
                         double oracle_se) {
  if (!std::isfinite(linear) || !std::isfinite(oracle))
    throw NumericError("oracle.compare", "non-finite comparison input", 0);
  if (linear_se < 0.0 || oracle_se < 0.0)
    throw DomainError("oracle.compare", "standard errors must be >= 0");

  ComparisonReport rep;
  rep.linear_estimate = linear;
  rep.oracle_value = oracle;
  rep.abs_error = std::abs(linear - oracle);
  rep.combined_se = std::sqrt(linear_se * linear_se + oracle_se * oracle_se);
  if (rep.combined_se == 0.0) {
    if (linear == oracle) {
      rep.z_score = 0.0;
      rep.consistent = true;
    } else {
      rep.z_score = linear > oracle ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
      rep.infinite_z = true;
      rep.consistent = false;
    }
    return rep;
  }
  rep.z_score = (linear - oracle) / rep.combined_se;
  rep.consistent = std::abs(rep.z_score) <= 3.0;
  return rep;
}

}  // namespace bsens
