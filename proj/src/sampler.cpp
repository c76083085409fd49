// Copyright 2026
// See LICENSE.txt

#include "bsens/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>

#include "bsens/errors.hpp"
#include "bsens/math.hpp"

namespace bsens {

namespace {

constexpr double kStickEps = 1e-12;

void check_config(const SamplerConfig& config) {
  if (config.n_draws < 1 || config.n_burnin < 0 || config.thin < 1)
    throw DomainError("sampler.config", "invalid draw/burnin/thin settings");
  if (config.n_draws < 100)
    std::cerr << "[sampler] warning: n_draws = " << config.n_draws
              << " is below the 100-draw floor recommended for sensitivity"
                 " estimation\n";
}

double sample_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  const double v = x / (x + y);
  return std::clamp(v, kStickEps, 1.0 - kStickEps);
}

int sample_categorical_logits(std::mt19937_64& rng, std::span<const double> logits) {
  const double lse = logsumexp(logits);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng), acc = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    acc += std::exp(logits[k] - lse);
    if (u <= acc) return static_cast<int>(k);
  }
  return static_cast<int>(logits.size()) - 1;
}

}  // namespace

// ---------------------------------------------------------------------------

SampleChain gibbs_normal_normal(const NormalNormalModel& model, const Dataset& data,
                                const CaseWeights& w, const SamplerConfig& config) {
  check_config(config);
  const auto post = exact_posterior(model, data, w);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> draw(post.mean, std::sqrt(post.variance));

  SampleChain chain(normal_normal_layout(), config.seed, "normal_normal");
  chain.reserve(static_cast<std::size_t>(config.n_draws));
  for (std::int64_t s = 0; s < config.n_draws; ++s) {
    const double mu = draw(rng);
    chain.append({&mu, 1});
  }
  chain.diagnostics["acceptance_rate"] = 1.0;
  return chain;
}

// ---------------------------------------------------------------------------

namespace {

struct MixtureSweepBuffers {
  std::vector<double> logits;      // K
  std::vector<double> log_pi;      // K
  std::vector<double> wcount;      // K, sum of w_n over z_n == k
  std::vector<double> wxsum;       // K, sum of w_n x_n over z_n == k
};

void update_assignments(std::mt19937_64& rng, const Dataset& data,
                        const CaseWeights& w, const std::vector<double>& sticks,
                        const std::vector<double>& comp_means, double obs_var,
                        std::vector<int>& z, MixtureSweepBuffers& buf) {
  const std::size_t K = sticks.size();
  const auto pi = stick_weights(sticks);
  for (std::size_t k = 0; k < K; ++k)
    buf.log_pi[k] = pi[k] > 0.0 ? std::log(pi[k])
                                : -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (std::size_t k = 0; k < K; ++k)
      buf.logits[k] =
          w[n] * (buf.log_pi[k] +
                  log_normal_pdf(data.points[n], comp_means[k], obs_var));
    z[n] = sample_categorical_logits(rng, buf.logits);
  }
}

void accumulate_weighted_counts(const Dataset& data, const CaseWeights& w,
                                const std::vector<int>& z,
                                MixtureSweepBuffers& buf) {
  std::fill(buf.wcount.begin(), buf.wcount.end(), 0.0);
  std::fill(buf.wxsum.begin(), buf.wxsum.end(), 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto k = static_cast<std::size_t>(z[n]);
    buf.wcount[k] += w[n];
    buf.wxsum[k] += w[n] * data.points[n];
  }
}

void update_comp_means(std::mt19937_64& rng, double comp_prior_var, double obs_var,
                       const MixtureSweepBuffers& buf,
                       std::vector<double>& comp_means) {
  for (std::size_t k = 0; k < comp_means.size(); ++k) {
    const double prec = 1.0 / comp_prior_var + buf.wcount[k] / obs_var;
    const double mean = (buf.wxsum[k] / obs_var) / prec;
    std::normal_distribution<double> draw(mean, std::sqrt(1.0 / prec));
    comp_means[k] = draw(rng);
  }
}

}  // namespace

SampleChain gibbs_dp_mixture(const TruncatedDPMixtureModel& model,
                             const Dataset& data, const CaseWeights& w,
                             const SamplerConfig& config) {
  check_config(config);
  if (data.size() == 0) throw DomainError("sampler.dp_mixture", "empty dataset");
  w.check_matches(data.size(), "sampler.dp_mixture");

  const auto K = static_cast<std::size_t>(model.K);
  const std::size_t N = data.size();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> prior_mean_draw(0.0, std::sqrt(model.comp_prior_var));

  MixtureState state;
  state.sticks.resize(K);
  state.comp_means.resize(K);
  state.assignments.assign(N, 0);
  for (std::size_t k = 0; k + 1 < K; ++k)
    state.sticks[k] = sample_beta(rng, 1.0, model.alpha);
  state.sticks[K - 1] = 1.0;
  for (std::size_t k = 0; k < K; ++k) state.comp_means[k] = prior_mean_draw(rng);

  MixtureSweepBuffers buf{std::vector<double>(K), std::vector<double>(K),
                          std::vector<double>(K), std::vector<double>(K)};

  SampleChain chain(mixture_layout(model.K, N), config.seed, "dp_mixture");
  chain.reserve(static_cast<std::size_t>(config.n_draws));

  const std::int64_t total = config.n_burnin + config.n_draws * config.thin;
  for (std::int64_t it = 0; it < total; ++it) {
    update_assignments(rng, data, w, state.sticks, state.comp_means, model.obs_var,
                       state.assignments, buf);
    accumulate_weighted_counts(data, w, state.assignments, buf);
    // v_k | z ~ Beta(1 + sum_{z_n=k} w_n, alpha + sum_{z_n>k} w_n)
    double tail = 0.0;
    for (std::size_t k = 0; k < K; ++k) tail += buf.wcount[k];
    for (std::size_t k = 0; k + 1 < K; ++k) {
      tail -= buf.wcount[k];
      state.sticks[k] = sample_beta(rng, 1.0 + buf.wcount[k], model.alpha + tail);
    }
    update_comp_means(rng, model.comp_prior_var, model.obs_var, buf,
                      state.comp_means);

    if (it >= config.n_burnin && (it - config.n_burnin) % config.thin == 0)
      chain.append(encode_mixture_state(state));
  }
  chain.diagnostics["acceptance_rate"] = 1.0;
  return chain;
}

// ---------------------------------------------------------------------------

SampleChain gibbs_esb_mixture(const EsbMixtureModel& model, const Dataset& data,
                              const CaseWeights& w, const SamplerConfig& config) {
  check_config(config);
  if (data.size() == 0) throw DomainError("sampler.esb_mixture", "empty dataset");
  w.check_matches(data.size(), "sampler.esb_mixture");

  const auto K = static_cast<std::size_t>(model.K);
  const std::size_t d = K - 1;  // free sticks
  const std::size_t N = data.size();
  const DependentStickPrior& prior = model.stick_prior;
  const double rho = prior.rho;
  const double dd = static_cast<double>(d);
  if (d >= 2 && !(rho > -1.0 / (dd - 1.0)))
    throw DomainError("sampler.esb_mixture", "rho leaves the stick prior singular");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // eta_k = logit(v_k); u = eta - base_mean. Quadratic form of the
  // equicorrelated Gaussian tracked through Q = sum u^2 and T = sum u.
  std::vector<double> eta(d);
  for (std::size_t k = 0; k < d; ++k)
    eta[k] = prior.base_mean + std::sqrt(prior.base_var) * std_normal(rng);

  MixtureState state;
  state.sticks.resize(K);
  state.comp_means.resize(K);
  state.assignments.assign(N, 0);
  for (std::size_t k = 0; k < d; ++k) state.sticks[k] = expit(eta[k]);
  state.sticks[K - 1] = 1.0;
  std::normal_distribution<double> prior_mean_draw(0.0, std::sqrt(model.comp_prior_var));
  for (std::size_t k = 0; k < K; ++k) state.comp_means[k] = prior_mean_draw(rng);

  MixtureSweepBuffers buf{std::vector<double>(K), std::vector<double>(K),
                          std::vector<double>(K), std::vector<double>(K)};

  const double tailR = 1.0 + (dd - 1.0) * rho;
  auto quad_form = [&](double Q, double T) {
    if (d < 2) return Q;
    return (Q - rho * T * T / tailR) / (1.0 - rho);
  };

  SampleChain chain(mixture_layout(model.K, N), config.seed, "esb_mixture");
  chain.reserve(static_cast<std::size_t>(config.n_draws));

  std::int64_t proposed = 0, accepted = 0;
  const std::int64_t total = config.n_burnin + config.n_draws * config.thin;
  for (std::int64_t it = 0; it < total; ++it) {
    update_assignments(rng, data, w, state.sticks, state.comp_means, model.obs_var,
                       state.assignments, buf);
    accumulate_weighted_counts(data, w, state.assignments, buf);
    update_comp_means(rng, model.comp_prior_var, model.obs_var, buf,
                      state.comp_means);

    // Componentwise random-walk MH on eta. The stick likelihood for
    // coordinate k is c_k log v_k + (sum_{j>k} c_j) log(1-v_k).
    double Q = 0.0, T = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = eta[k] - prior.base_mean;
      Q += u * u;
      T += u;
    }
    std::vector<double> tail_counts(d);
    {
      double tail = 0.0;
      for (std::size_t k = K; k-- > 0;) {
        if (k < d) tail_counts[k] = tail;
        tail += buf.wcount[k];
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double u_old = eta[k] - prior.base_mean;
      const double eta_new = eta[k] + config.mh_step_size * std_normal(rng);
      const double u_new = eta_new - prior.base_mean;
      const double v_old = state.sticks[k];
      const double v_new = expit(eta_new);
      ++proposed;
      if (!(v_new > 0.0) || !(v_new < 1.0)) continue;  // numeric underflow guard

      const double Q_new = Q - u_old * u_old + u_new * u_new;
      const double T_new = T - u_old + u_new;
      double delta = -0.5 * (quad_form(Q_new, T_new) - quad_form(Q, T)) / prior.base_var;
      delta += buf.wcount[k] * (std::log(v_new) - std::log(v_old));
      delta += tail_counts[k] * (std::log1p(-v_new) - std::log1p(-v_old));
      if (std::log(unif(rng)) < delta) {
        eta[k] = eta_new;
        state.sticks[k] = v_new;
        Q = Q_new;
        T = T_new;
        ++accepted;
      }
    }

    if (it >= config.n_burnin && (it - config.n_burnin) % config.thin == 0)
      chain.append(encode_mixture_state(state));
  }
  chain.diagnostics["acceptance_rate"] =
      proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed)
                   : 0.0;
  return chain;
}

// ---------------------------------------------------------------------------

SampleChain mh_generic(const LogTarget& log_target, std::vector<double> init_state,
                       const ChainLayout& layout, const SamplerConfig& config) {
  check_config(config);
  const std::size_t D = init_state.size();
  if (layout.dim() != D)
    throw DimensionError("sampler.mh", "layout does not match state dimension");
  double lp = log_target(init_state);
  if (!std::isfinite(lp))
    throw DomainError("sampler.mh", "log target not finite at the initial state");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SampleChain chain(layout, config.seed, "mh_generic");
  chain.reserve(static_cast<std::size_t>(config.n_draws));

  std::vector<double> state = std::move(init_state);
  std::vector<double> proposal(D);
  std::int64_t moves = 0, proposals = 0;
  const std::int64_t total = config.n_burnin + config.n_draws * config.thin;
  for (std::int64_t it = 0; it < total; ++it) {
    for (std::size_t j = 0; j < D; ++j) {
      proposal = state;
      proposal[j] = state[j] + config.mh_step_size * std_normal(rng);
      ++proposals;
      const double lp_new = log_target(proposal);
      const bool moved = proposal[j] != state[j];
      if (std::isfinite(lp_new) && std::log(unif(rng)) < lp_new - lp) {
        if (moved) ++moves;
        state[j] = proposal[j];
        lp = lp_new;
      }
    }
    if (it == config.n_burnin - 1 && moves == 0)
      throw DiagnosticsError("sampler.mh",
                             "chain never moved during burn-in; check the proposal"
                             " scale");
    if (it >= config.n_burnin && (it - config.n_burnin) % config.thin == 0)
      chain.append(state);
  }
  if (moves == 0)
    throw DiagnosticsError("sampler.mh", "chain never moved; check the proposal scale");
  chain.diagnostics["acceptance_rate"] =
      proposals > 0 ? static_cast<double>(moves) / static_cast<double>(proposals) : 0.0;
  return chain;
}

SampleChain mh_normal_normal(const NormalNormalModel& model, const Dataset& data,
                             const CaseWeights& w, const SamplerConfig& config,
                             double init_mu) {
  auto target = [&](std::span<const double> s) {
    return weighted_log_joint(model, s[0], data, w);
  };
  return mh_generic(target, {init_mu}, normal_normal_layout(), config);
}

}  // namespace bsens
