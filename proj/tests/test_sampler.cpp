// Copyright 2026
// See LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "bsens/diagnostics.hpp"
#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"
#include "bsens/sampler.hpp"

using namespace bsens;

namespace {

bool chains_equal(const SampleChain& a, const SampleChain& b) {
  if (a.n_draws() != b.n_draws() || a.dim() != b.dim()) return false;
  for (std::size_t s = 0; s < a.n_draws(); ++s) {
    const auto ra = a.row(s), rb = b.row(s);
    for (std::size_t j = 0; j < ra.size(); ++j)
      if (ra[j] != rb[j]) return false;
  }
  return true;
}

double chain_mean(const SampleChain& chain, const Functional& f) {
  return kernels::mean(kernels::eval_over_draws(chain, f));
}

void check_valid_mixture_states(const SampleChain& chain, int K, std::size_t N) {
  for (std::size_t s = 0; s < chain.n_draws(); ++s) {
    const auto st = decode_mixture_state(chain.state(s));
    REQUIRE(st.K() == K);
    REQUIRE(st.assignments.size() == N);
    for (int k = 0; k + 1 < K; ++k) {
      REQUIRE(st.sticks[static_cast<std::size_t>(k)] > 0.0);
      REQUIRE(st.sticks[static_cast<std::size_t>(k)] < 1.0);
    }
    REQUIRE(st.sticks[static_cast<std::size_t>(K - 1)] == 1.0);
    const auto pi = stick_weights(st.sticks);
    double total = 0.0;
    for (double p : pi) total += p;
    REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int z : st.assignments) REQUIRE((z >= 0 && z < K));
  }
}

}  // namespace

TEST_CASE("conjugate sampler hits the exact posterior") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.seed = 31;

  const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  const double mean = chain_mean(chain, mu);
  CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(0.5 / 100000.0));

  const auto prior_chain = gibbs_normal_normal(model, data, CaseWeights({0.0}), cfg);
  const double prior_mean = chain_mean(prior_chain, mu);
  CHECK(std::abs(prior_mean - 0.0) < 3.0 * std::sqrt(1.0 / 100000.0));
}

TEST_CASE("fixed seed reproduces the chain byte for byte") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 500;
  cfg.seed = 99;
  CHECK(chains_equal(gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg),
                     gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg)));

  TruncatedDPMixtureModel mix(5, 1.0, 25.0, 1.0);
  Dataset mixdata({-5.0, -4.8, 5.0, 5.2});
  cfg.n_draws = 200;
  cfg.n_burnin = 50;
  CHECK(chains_equal(gibbs_dp_mixture(mix, mixdata, CaseWeights::ones(4), cfg),
                     gibbs_dp_mixture(mix, mixdata, CaseWeights::ones(4), cfg)));

  EsbMixtureModel esb(4, DependentStickPrior(0.3, 0.0, 1.0), 25.0, 1.0);
  CHECK(chains_equal(gibbs_esb_mixture(esb, mixdata, CaseWeights::ones(4), cfg),
                     gibbs_esb_mixture(esb, mixdata, CaseWeights::ones(4), cfg)));
}

TEST_CASE("dp mixture: two well-separated clusters are found") {
  std::vector<double> pts;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> left(-5.0, 0.5), right(5.0, 0.5);
  for (int i = 0; i < 10; ++i) pts.push_back(left(rng));
  for (int i = 0; i < 10; ++i) pts.push_back(right(rng));
  Dataset data(pts);
  TruncatedDPMixtureModel model(10, 1.0, 25.0, 0.25);

  SamplerConfig cfg;
  cfg.n_draws = 4000;
  cfg.n_burnin = 1000;
  cfg.seed = 11;
  const auto chain = gibbs_dp_mixture(model, data, CaseWeights::ones(20), cfg);
  check_valid_mixture_states(chain, 10, 20);

  const auto occupied = make_occupied_clusters_functional(CaseWeights::ones(20));
  std::map<int, int> hist;
  for (std::size_t s = 0; s < chain.n_draws(); ++s)
    hist[static_cast<int>(occupied(chain.state(s)))]++;
  const auto mode =
      std::max_element(hist.begin(), hist.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(mode->first == 2);
}

TEST_CASE("dp mixture: all-zero weights reproduce the stick prior (KS test)") {
  TruncatedDPMixtureModel model(4, 1.7, 25.0, 1.0);
  Dataset data({0.0, 1.0});
  SamplerConfig cfg;
  cfg.n_draws = 10000;
  cfg.n_burnin = 200;
  cfg.seed = 5;
  const auto chain = gibbs_dp_mixture(model, data, CaseWeights({0.0, 0.0}), cfg);

  // v_1 should be Beta(1, alpha) with CDF 1 - (1-v)^alpha; the draws are
  // conditionally independent given the (ignored) data, hence i.i.d.
  auto v1 = kernels::eval_over_draws(chain,
                                     make_coordinate_functional("sticks", 0, "v1"));
  std::sort(v1.begin(), v1.end());
  double dmax = 0.0;
  const double S = static_cast<double>(v1.size());
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const double cdf = 1.0 - std::pow(1.0 - v1[i], model.alpha);
    dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i + 1) / S));
    dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i) / S));
  }
  // critical value at level 0.01
  CHECK(dmax < 1.628 / std::sqrt(S));
}

TEST_CASE("dp mixture rejects empty data") {
  TruncatedDPMixtureModel model(3, 1.0, 25.0, 1.0);
  CHECK_THROWS_AS(Dataset(std::vector<double>{}), DomainError);
}

TEST_CASE("esb mixture: states valid, sticks move, acceptance is sane") {
  EsbMixtureModel model(6, DependentStickPrior(0.0, 0.0, 1.5), 25.0, 0.5);
  std::vector<double> pts;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gen(0.0, 2.0);
  for (int i = 0; i < 12; ++i) pts.push_back(gen(rng));
  Dataset data(pts);

  SamplerConfig cfg;
  cfg.n_draws = 3000;
  cfg.n_burnin = 500;
  cfg.seed = 3;
  cfg.mh_step_size = 0.6;
  const auto chain = gibbs_esb_mixture(model, data, CaseWeights::ones(12), cfg);
  check_valid_mixture_states(chain, 6, 12);

  const double acc = chain.diagnostics.at("acceptance_rate");
  CHECK(acc > 0.05);
  CHECK(acc < 0.99);

  // the stick block must actually mix
  const auto v1 = kernels::eval_over_draws(
      chain, make_coordinate_functional("sticks", 0, "v1"));
  const double lo = *std::min_element(v1.begin(), v1.end());
  const double hi = *std::max_element(v1.begin(), v1.end());
  CHECK(hi - lo > 0.05);
}

TEST_CASE("mh generic agrees with the conjugate sampler") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 100000;
  cfg.n_burnin = 2000;
  cfg.seed = 17;
  cfg.mh_step_size = 1.2;

  const auto mh = mh_normal_normal(model, data, CaseWeights({1.0}), cfg, 0.0);
  const auto mu = make_coordinate_functional("mu", 0, "mu");
  const auto series = kernels::eval_over_draws(mh, mu);
  const double mean = kernels::mean(series);
  const double se = mcse_batch_means(series);

  SamplerConfig gcfg = cfg;
  gcfg.seed = 18;
  const auto gibbs = gibbs_normal_normal(model, data, CaseWeights({1.0}), gcfg);
  const auto gseries = kernels::eval_over_draws(gibbs, mu);
  const double gmean = kernels::mean(gseries);
  const double gse = mcse_batch_means(gseries);

  CHECK(std::abs(mean - 1.0) < 3.0 * se);
  CHECK(std::abs(mean - gmean) < 3.0 * std::sqrt(se * se + gse * gse));
}

TEST_CASE("mh generic: degenerate proposal raises a diagnostics error") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 200;
  cfg.n_burnin = 100;
  cfg.mh_step_size = 0.0;
  CHECK_THROWS_AS(mh_normal_normal(model, data, CaseWeights({1.0}), cfg, 0.0),
                  DiagnosticsError);
}

TEST_CASE("mh generic requires a finite initial log target") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  CHECK_THROWS_AS(
      mh_normal_normal(model, data, CaseWeights({1.0}), cfg,
                       std::numeric_limits<double>::quiet_NaN()),
      Error);
}

TEST_CASE("stationarity smoke test: split-half means agree") {
  TruncatedDPMixtureModel model(6, 1.0, 25.0, 0.5);
  Dataset data({-3.0, -2.9, 0.1, 0.3, 3.1, 3.3});
  SamplerConfig cfg;
  cfg.n_draws = 8000;
  cfg.n_burnin = 1000;
  cfg.seed = 23;
  const auto chain = gibbs_dp_mixture(model, data, CaseWeights::ones(6), cfg);
  const auto phi = make_predictive_density_functional(0.5, 0.0);
  const auto series = kernels::eval_over_draws(chain, phi);
  const std::size_t half = series.size() / 2;
  std::span<const double> first(series.data(), half);
  std::span<const double> second(series.data() + half, series.size() - half);
  const double m1 = kernels::mean(first), m2 = kernels::mean(second);
  const double se1 = mcse_batch_means(first), se2 = mcse_batch_means(second);
  CHECK(std::abs(m1 - m2) < 4.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("ess: iid, constant, and AR(1) chains") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> normal(0.0, 1.0);

  SUBCASE("iid draws") {
    std::vector<double> y(10000);
    for (auto& v : y) v = normal(rng);
    const double e = ess_series(y);
    CHECK(e / 10000.0 > 0.8);
    CHECK(e / 10000.0 < 1.2);
  }

  SUBCASE("constant series") {
    std::vector<double> y(500, 3.25);
    CHECK(ess_series(y) == 500.0);
  }

  SUBCASE("AR(1) with autocorrelation 0.9") {
    const std::size_t S = 100000;
    std::vector<double> y(S);
    double x = 0.0;
    const double rho = 0.9, innov = std::sqrt(1.0 - rho * rho);
    for (std::size_t s = 0; s < S; ++s) {
      x = rho * x + innov * normal(rng);
      y[s] = x;
    }
    const double ratio = ess_series(y) / static_cast<double>(S);
    const double expect = (1.0 - rho) / (1.0 + rho);
    CHECK(ratio > 0.7 * expect);
    CHECK(ratio < 1.3 * expect);
  }

  SUBCASE("too few draws") {
    std::vector<double> y(5, 1.0);
    CHECK_THROWS_AS(ess_series(y), InsufficientSamplesError);
  }
}

TEST_CASE("ess through a chain functional") {
  NormalNormalModel model(1.0, 0.0, 1.0);
  Dataset data({2.0});
  SamplerConfig cfg;
  cfg.n_draws = 5000;
  cfg.seed = 301;
  const auto chain = gibbs_normal_normal(model, data, CaseWeights({1.0}), cfg);
  const double e = ess(chain, make_coordinate_functional("mu", 0, "mu"));
  CHECK(e > 0.8 * 5000.0);
  CHECK(e <= 5000.0);
}
