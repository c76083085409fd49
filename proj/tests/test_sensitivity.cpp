// Copyright 2026
// See LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bsens/diagnostics.hpp"
#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"
#include "bsens/oracle.hpp"
#include "bsens/sampler.hpp"
#include "bsens/sensitivity.hpp"

using namespace bsens;

namespace {

SampleChain iid_normal_chain(std::size_t S, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> draws(S);
  for (auto& v : draws) v = normal(rng);
  return make_scalar_chain(std::move(draws), "mu");
}

double chain_mean(const SampleChain& chain, const Functional& f) {
  return kernels::mean(kernels::eval_over_draws(chain, f));
}

}  // namespace

TEST_CASE("posterior covariance: hand-checkable values") {
  const auto f_chain = make_scalar_chain({1.0, 2.0, 3.0}, "mu");
  const auto id = make_coordinate_functional("mu", 0, "mu");

  SUBCASE("against a constant the covariance is exactly zero") {
    const auto est = posterior_cov(f_chain, id, make_constant_functional(7.0));
    CHECK(est.value == 0.0);
  }

  SUBCASE("three-draw arithmetic") {
    const std::vector<double> f{1.0, 2.0, 3.0};
    const std::vector<double> g{1.0, 0.0, -1.0};
    const auto est = posterior_cov_series(f, g);
    CHECK(est.value == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(est.n_draws == 3);
  }

  SUBCASE("too few draws") {
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(posterior_cov_series(one, one), InsufficientSamplesError);
  }
}

TEST_CASE("posterior covariance: variance of iid standard normals") {
  const auto chain = iid_normal_chain(100000, 5);
  const auto id = make_coordinate_functional("mu", 0, "mu");
  const auto est = posterior_cov(chain, id, id);
  CHECK(est.mc_se > 0.0);
  CHECK(std::abs(est.value - 1.0) < 3.0 * est.mc_se);
  // iid draws: batch means should report nearly full effective size
  CHECK(est.ess_used > 0.5 * static_cast<double>(est.n_draws));
}

TEST_CASE("posterior covariance: symmetry and linearity") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> f(5000), g(5000);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = normal(rng);
    g[i] = 0.5 * f[i] + normal(rng);
  }
  const auto fg = posterior_cov_series(f, g);
  const auto gf = posterior_cov_series(g, f);
  CHECK(fg.value == gf.value);  // exact symmetry

  // cov(a f + b, g) = a cov(f, g)
  const double a = -2.25, b = 3.75;
  std::vector<double> af(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) af[i] = a * f[i] + b;
  const auto scaled = posterior_cov_series(af, g);
  CHECK(scaled.value == doctest::Approx(a * fg.value).epsilon(1e-12));
}

TEST_CASE("hyper sensitivity on the conjugate model") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 21;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");

  // truth: dE[mu]/dmu0 = (1/tau2) / (sum w/sigma2 + 1/tau2) = 0.5
  const auto est = hyper_sensitivity(chain, mu, make_dlogjoint_dmu0_functional(model));
  CHECK(std::abs(est.value - 0.5) < 3.0 * est.mc_se);

  const auto zero =
      hyper_sensitivity(chain, make_constant_functional(4.0),
                        make_dlogjoint_dmu0_functional(model));
  CHECK(zero.value == 0.0);
}

TEST_CASE("hyper sensitivity mc_se calibration over replications") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  int hits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    SamplerConfig cfg;
    cfg.n_draws = 2000;
    cfg.seed = 1000 + static_cast<std::uint64_t>(rep);
    const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
    const auto est =
        hyper_sensitivity(chain, mu, make_dlogjoint_dmu0_functional(model));
    if (std::abs(est.value - 0.5) <= 3.0 * est.mc_se) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("hyper sensitivity on the mixture concentration vs refit oracle") {
  std::vector<double> pts;
  std::mt19937_64 rng(303);
  std::normal_distribution<double> a(-4.0, 0.5), b(4.0, 0.5);
  for (int i = 0; i < 8; ++i) pts.push_back(a(rng));
  for (int i = 0; i < 8; ++i) pts.push_back(b(rng));
  Dataset data(pts);
  TruncatedDPMixtureModel model(8, 1.0, 25.0, 0.25);
  const auto w = CaseWeights::ones(16);
  const auto phi = make_occupied_clusters_functional(w);

  SamplerConfig cfg;
  cfg.n_draws = 30000;
  cfg.n_burnin = 1000;
  cfg.seed = 71;
  const auto chain = gibbs_dp_mixture(model, data, w, cfg);
  const auto est =
      hyper_sensitivity(chain, phi, make_dlogjoint_dalpha_functional(model));

  auto pipeline = [&](double alpha, std::uint64_t seed) -> PipelineValue {
    TruncatedDPMixtureModel shifted(8, alpha, 25.0, 0.25);
    SamplerConfig rcfg = cfg;
    rcfg.seed = seed;
    const auto rchain = gibbs_dp_mixture(shifted, data, w, rcfg);
    const auto series = kernels::eval_over_draws(rchain, phi);
    return {kernels::mean(series), mcse_batch_means(series)};
  };
  FDSpec spec;
  spec.step = 0.1;
  spec.seed_plus = 811;
  spec.seed_minus = 317;
  const auto fd = fd_derivative(pipeline, 1.0, spec);

  const auto rep = compare(est.value, est.mc_se, fd.value, fd.se);
  CHECK(rep.consistent);
  // more concentration should mean more occupied clusters
  CHECK(est.value > 0.0);
}

TEST_CASE("case influence on the conjugate model") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 41;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");

  // truth: d/dw [2w/(w+1)] at w=1 is 0.5
  const auto infl = case_influence(chain, mu, data, model);
  REQUIRE(infl.per_point.size() == 1);
  const auto est = posterior_cov(
      chain, mu, Functional{"ll", [&](const StateView& s) {
                              return per_point_loglik(model, s.scalar("mu"), 2.0);
                            }});
  CHECK(infl.per_point[0] == doctest::Approx(est.value).epsilon(1e-12));
  CHECK(std::abs(infl.per_point[0] - 0.5) < 3.0 * est.mc_se);

  const auto zero = case_influence(chain, make_constant_functional(1.0), data, model);
  CHECK(zero.per_point[0] == 0.0);
}

TEST_CASE("case influence: symmetric data gives antisymmetric influences") {
  const double a = 1.5;
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({-a, a});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 43;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights::ones(2), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  const auto infl = case_influence(chain, mu, data, model);
  REQUIRE(infl.per_point.size() == 2);

  const auto se0 = posterior_cov(
      chain, mu, Functional{"ll0", [&](const StateView& s) {
                              return per_point_loglik(model, s.scalar("mu"), -a);
                            }});
  CHECK(std::abs(infl.per_point[0] + infl.per_point[1]) < 3.0 * 2.0 * se0.mc_se);
  CHECK(infl.per_point[1] > 0.0);
  CHECK(infl.per_point[0] < 0.0);
}

TEST_CASE("sum of influences approximates the common-epsilon derivative") {
  NormalNormalModel model(1.0, 0.3, 2.0);
  Dataset data({0.5, 2.0, -1.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 47;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights::ones(3), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  const auto infl = case_influence(chain, mu, data, model);
  double total = 0.0;
  for (double v : infl.per_point) total += v;

  // by linearity the sum is one covariance; use it for an honest mc_se
  const auto sum_ll = Functional{"sum_ll", [&](const StateView& s) {
                                   double t = 0.0;
                                   for (double x : data.points)
                                     t += per_point_loglik(model, s.scalar("mu"), x);
                                   return t;
                                 }};
  const auto est = posterior_cov(chain, mu, sum_ll);
  CHECK(total == doctest::Approx(est.value).epsilon(1e-10));

  // deterministic oracle: E[mu | w = (1+eps) * ones] via the exact posterior
  auto pipeline = [&](double eps, std::uint64_t) -> PipelineValue {
    CaseWeights w = CaseWeights::ones(3);
    for (auto& wi : w.w) wi = 1.0 + eps;
    return {exact_posterior(model, data, w).mean, 0.0};
  };
  FDSpec spec;
  spec.step = 1e-5;
  const auto fd = fd_derivative(pipeline, 0.0, spec);
  CHECK(compare(est.value, est.mc_se, fd.value, fd.se).consistent);
}

TEST_CASE("esb rho sensitivity: constant functional and refit oracle") {
  EsbMixtureModel model(6, DependentStickPrior(0.0, 0.0, 1.0), 25.0, 0.5);
  std::vector<double> pts;
  std::mt19937_64 rng(907);
  std::normal_distribution<double> gen(0.0, 1.5);
  for (int i = 0; i < 12; ++i) pts.push_back(gen(rng));
  Dataset data(pts);
  const auto w = CaseWeights::ones(12);

  SamplerConfig cfg;
  cfg.n_draws = 20000;
  cfg.n_burnin = 1000;
  cfg.seed = 53;
  cfg.mh_step_size = 0.6;
  const auto chain = gibbs_esb_mixture(model, data, w, cfg);

  SUBCASE("constant gives exact zero") {
    const auto zero =
        esb_rho_sensitivity(chain, make_constant_functional(2.0), model.stick_prior);
    CHECK(zero.value == 0.0);
  }

  SUBCASE("first stick vs refit finite difference") {
    const auto v1 = make_coordinate_functional("sticks", 0, "first_stick");
    const auto est = esb_rho_sensitivity(chain, v1, model.stick_prior);

    auto pipeline = [&](double rho, std::uint64_t seed) -> PipelineValue {
      EsbMixtureModel shifted(6, model.stick_prior.with_rho(rho), 25.0, 0.5);
      SamplerConfig rcfg = cfg;
      rcfg.seed = seed;
      const auto rchain = gibbs_esb_mixture(shifted, data, w, rcfg);
      const auto series = kernels::eval_over_draws(rchain, v1);
      return {kernels::mean(series), mcse_batch_means(series)};
    };
    FDSpec spec;
    spec.step = 0.05;
    spec.seed_plus = 8311;
    spec.seed_minus = 1931;
    const auto fd = fd_derivative(pipeline, 0.0, spec);
    CHECK(compare(est.value, est.mc_se, fd.value, fd.se).consistent);
  }
}

TEST_CASE("esb rho sensitivity: boundary stick names the draw") {
  // synthetic chain whose second draw has a stick at 1
  SampleChain chain(mixture_layout(3, 1), 0, "synthetic");
  chain.append(std::vector<double>{0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0});
  chain.append(std::vector<double>{0.5, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0});
  DependentStickPrior prior(0.0, 0.0, 1.0);
  try {
    esb_rho_sensitivity(chain, make_constant_functional(1.0), prior);
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("linear extrapolation") {
  SensitivityEstimate est;
  est.value = 0.5;
  CHECK(linear_extrapolate(1.0, est, 0.0) == 1.0);
  CHECK(linear_extrapolate(1.0, est, -1.0) == 0.5);

  // drop-one illustration on the conjugate model: the linear prediction lands
  // at 0.5 while the exact refit is 0.0, i.e. the linearization recovers only
  // half of the true change. Documented, not an accuracy claim.
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 61;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  const auto infl = case_influence(chain, mu, data, model);
  const double base = chain_mean(chain, mu);
  SensitivityEstimate slope;
  slope.value = infl.per_point[0];
  const double predicted = linear_extrapolate(base, slope, -1.0);
  const double exact = exact_posterior(model, data, CaseWeights({0.0})).mean;

  CHECK(std::abs(predicted - 0.5) < 0.02);
  CHECK(exact == 0.0);
  const double gap = std::abs(predicted - exact) / std::abs(base - exact);
  CHECK(gap == doctest::Approx(0.5).epsilon(0.05));  // the documented 50% gap
}
