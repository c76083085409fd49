// Copyright 2026
// See LICENSE.txt

#include "bsens/empirical_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsens/diagnostics.hpp"
#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"

namespace bsens {

double cluster_count_G(double alpha, double m, std::int64_t N) {
  if (!(alpha > 0.0)) throw DomainError("empirical_bayes.G", "alpha must be > 0");
  if (N < 1) throw DomainError("empirical_bayes.G", "N must be >= 1");
  double s = 0.0;
  for (std::int64_t n = 1; n <= N; ++n)
    s += alpha / (alpha + static_cast<double>(n - 1));
  return s - m;
}

double dG_dalpha(double alpha, std::int64_t N) {
  if (!(alpha > 0.0)) throw DomainError("empirical_bayes.G", "alpha must be > 0");
  if (N < 1) throw DomainError("empirical_bayes.G", "N must be >= 1");
  double s = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double denom = alpha + static_cast<double>(n - 1);
    s += static_cast<double>(n - 1) / (denom * denom);
  }
  return s;
}

namespace {

struct MEval {
  double m = 0.0;
  double se = 0.0;
};

MEval estimate_m(const TruncatedDPMixtureModel& model, const Dataset& data,
                 const CaseWeights& w, const SamplerConfig& config) {
  const auto chain = gibbs_dp_mixture(model, data, w, config);
  const auto F = make_occupied_clusters_functional(w);
  const auto series = kernels::eval_over_draws(chain, F);
  return {kernels::mean(series), mcse_batch_means(series)};
}

}  // namespace

EBSolution solve_eb(const TruncatedDPMixtureModel& model, const Dataset& data,
                    const CaseWeights& w, const SamplerConfig& sampler_config,
                    const EBSolverConfig& solver_config) {
  if (data.size() == 0) throw DomainError("empirical_bayes.solve", "empty dataset");
  const auto N = static_cast<std::int64_t>(data.size());

  EBSolution sol;
  auto eval_G = [&](double alpha, int eval_index) -> std::pair<double, MEval> {
    TruncatedDPMixtureModel candidate(model.K, alpha, model.comp_prior_var,
                                      model.obs_var);
    SamplerConfig cfg = sampler_config;
    if (!solver_config.common_random_numbers)
      cfg.seed = sampler_config.seed + 0x9e3779b97f4a7c15ULL *
                                           static_cast<std::uint64_t>(eval_index + 1);
    const MEval me = estimate_m(candidate, data, w, cfg);
    const double g = cluster_count_G(alpha, me.m, N);
    sol.trace.push_back({alpha, me.m, g});
    return {g, me};
  };

  double lo = solver_config.bracket_lo, hi = solver_config.bracket_hi;
  auto [g_lo, me_lo] = eval_G(lo, 0);
  auto [g_hi, me_hi] = eval_G(hi, 1);

  if (std::abs(g_lo) < solver_config.tol && std::abs(g_hi) < solver_config.tol)
    throw NonIdentifiedError("empirical_bayes.solve",
                             "estimating equation is flat across the bracket; "
                             "alpha is not identified (G ~ 0 everywhere)");

  // A bracket endpoint can already satisfy the equation when the root sits on
  // the boundary of (0, inf), e.g. single-cluster data pushing alpha to 0+.
  auto endpoint_solution = [&](double alpha, double g, const MEval& me) {
    sol.alpha_hat = alpha;
    sol.residual = std::abs(g);
    sol.iterations = static_cast<int>(sol.trace.size());
    sol.bracket_lo = alpha * (1.0 - solver_config.rel_bracket);
    sol.bracket_hi = alpha * (1.0 + solver_config.rel_bracket);
    sol.m_hat = me.m;
    sol.m_se = me.se;
    return sol;
  };
  if (std::abs(g_lo) < solver_config.tol) return endpoint_solution(lo, g_lo, me_lo);
  if (std::abs(g_hi) < solver_config.tol) return endpoint_solution(hi, g_hi, me_hi);

  if (g_lo * g_hi > 0.0) {
    std::ostringstream msg;
    msg << "no sign change on bracket [" << lo << ", " << hi << "]: G(lo)=" << g_lo
        << ", G(hi)=" << g_hi;
    throw BracketError("empirical_bayes.bracket", msg.str());
  }

  double mid = 0.5 * (lo + hi);
  MEval me_mid = me_lo;
  double g_mid = g_lo;
  int it = 0;
  for (; it < solver_config.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    auto [g, me] = eval_G(mid, it + 2);
    g_mid = g;
    me_mid = me;
    if (std::abs(g_mid) < solver_config.tol) break;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
    if (hi - lo < solver_config.rel_bracket * mid) {
      if (std::abs(g_mid) >= solver_config.tol) {
        std::ostringstream msg;
        msg << "bracket collapsed at alpha=" << mid << " with |G|=" << std::abs(g_mid)
            << " > tol=" << solver_config.tol << " (MC se of m: " << me_mid.se
            << "); increase sampler draws";
        throw NoisyObjectiveError("empirical_bayes.solve", msg.str());
      }
      break;
    }
  }

  sol.alpha_hat = mid;
  sol.residual = std::abs(g_mid);
  sol.iterations = it + 1;
  sol.bracket_lo = lo;
  sol.bracket_hi = hi;
  sol.m_hat = me_mid.m;
  sol.m_se = me_mid.se;
  if (sol.residual >= solver_config.tol) {
    std::ostringstream msg;
    msg << "failed to reach |G| < " << solver_config.tol << " within "
        << solver_config.max_iterations << " iterations (last |G|=" << sol.residual
        << ", MC se of m: " << me_mid.se << "); increase sampler draws";
    throw NoisyObjectiveError("empirical_bayes.solve", msg.str());
  }
  return sol;
}

namespace {

Functional make_omega_score(const TruncatedDPMixtureModel& model,
                            const Dataset& data, const OmegaSpec& omega) {
  switch (omega.kind) {
    case OmegaSpec::Kind::case_weight: {
      if (omega.weight_index >= data.size())
        throw DimensionError("empirical_bayes.omega", "weight index out of range");
      return make_weight_score_functional(model.obs_var,
                                          data.points[omega.weight_index],
                                          omega.weight_index);
    }
    case OmegaSpec::Kind::comp_prior_mean: {
      // d/dm0 of sum_k log N(mu_k | m0, var) at m0 = 0
      const double var = model.comp_prior_var;
      return {"dlogjoint_dcomp_prior_mean", [var](const StateView& s) {
                double sum = 0.0;
                for (double m : s.block("comp_means")) sum += m / var;
                return sum;
              }};
    }
  }
  throw DomainError("empirical_bayes.omega", "unknown omega kind");
}

}  // namespace

EBDerivativeBreakdown eb_sensitivity(const SampleChain& chain,
                                     const Functional& phi, const Functional& F,
                                     const TruncatedDPMixtureModel& model,
                                     const Dataset& data, const CaseWeights& w,
                                     const OmegaSpec& omega) {
  w.check_matches(data.size(), "empirical_bayes.sensitivity");
  const auto N = static_cast<std::int64_t>(data.size());

  const Functional score_alpha = make_dlogjoint_dalpha_functional(model);
  const Functional score_omega = make_omega_score(model, data, omega);

  const auto phis = kernels::eval_over_draws(chain, phi);
  const auto Fs = kernels::eval_over_draws(chain, F);
  const auto sa = kernels::eval_over_draws(chain, score_alpha);
  const auto so = kernels::eval_over_draws(chain, score_omega);

  EBDerivativeBreakdown out;
  out.dm_dalpha = posterior_cov_series(Fs, sa);
  out.dm_domega = posterior_cov_series(Fs, so);
  out.cov_phi_score_alpha = posterior_cov_series(phis, sa);
  out.cov_phi_score_omega = posterior_cov_series(phis, so);

  out.dG_dm = dG_dm();
  const double dG_da_at_m0 = dG_dalpha(model.alpha, N);
  out.dG_dalpha_total = dG_da_at_m0 + out.dG_dm * out.dm_dalpha.value;

  const double scale = std::max(1.0, std::abs(dG_da_at_m0));
  if (std::abs(out.dG_dalpha_total) < 1e-10 * scale)
    throw SingularityError("empirical_bayes.sensitivity",
                           "total dG/dalpha is numerically singular; the "
                           "implicit-function derivative is undefined",
                           0);

  out.dalpha_domega =
      -(1.0 / out.dG_dalpha_total) * (out.dG_dm * out.dm_domega.value);

  out.direct_term = out.cov_phi_score_omega.value;
  out.indirect_term = out.cov_phi_score_alpha.value * out.dalpha_domega;
  out.total = out.direct_term + out.indirect_term;

  // First-order error propagation; chain-internal correlations between the
  // covariance estimates are ignored.
  const double se_dad =
      std::abs(out.dalpha_domega) *
      std::sqrt(std::pow(out.dm_domega.value != 0.0
                             ? out.dm_domega.mc_se / out.dm_domega.value
                             : 0.0,
                         2) +
                std::pow(out.dm_dalpha.mc_se / out.dG_dalpha_total, 2));
  out.total_se = std::sqrt(
      std::pow(out.cov_phi_score_omega.mc_se, 2) +
      std::pow(out.dalpha_domega * out.cov_phi_score_alpha.mc_se, 2) +
      std::pow(out.cov_phi_score_alpha.value * se_dad, 2));
  return out;
}

PipelineValue eb_refit_expectation(const TruncatedDPMixtureModel& model,
                                   const Dataset& data, const CaseWeights& w,
                                   const SamplerConfig& solver_chains,
                                   const SamplerConfig& expectation_chain,
                                   const EBSolverConfig& solver_config,
                                   const Functional& phi, std::uint64_t seed) {
  SamplerConfig scfg = solver_chains;
  scfg.seed = seed;
  const EBSolution sol = solve_eb(model, data, w, scfg, solver_config);

  TruncatedDPMixtureModel fitted(model.K, sol.alpha_hat, model.comp_prior_var,
                                 model.obs_var);

  // Several independent expectation chains: mixture chains carry
  // between-chain dispersion (metastable occupancy) that a single chain's
  // batch means cannot see, so the standard error comes from the spread of
  // the chain means, floored at the pooled within-chain estimate.
  constexpr int kChains = 6;
  SamplerConfig ecfg = expectation_chain;
  ecfg.n_draws = std::max<std::int64_t>(expectation_chain.n_draws / 3, 2000);
  std::vector<double> chain_means(kChains);
  std::vector<double> chain_ses(kChains);
  SampleChain last_chain(mixture_layout(model.K, data.size()), 0, "unset");
  for (int c = 0; c < kChains; ++c) {
    ecfg.seed = (seed ^ 0x51ed2701a6b3c48dULL) +
                0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(c);
    auto chain_c = gibbs_dp_mixture(fitted, data, w, ecfg);
    const auto series = kernels::eval_over_draws(chain_c, phi);
    chain_means[static_cast<std::size_t>(c)] = kernels::mean(series);
    chain_ses[static_cast<std::size_t>(c)] = mcse_batch_means(series);
    if (c == kChains - 1) last_chain = std::move(chain_c);
  }
  PipelineValue out;
  out.value = kernels::mean(chain_means);
  double between_ss = 0.0, within_ss = 0.0;
  for (int c = 0; c < kChains; ++c) {
    const double d = chain_means[static_cast<std::size_t>(c)] - out.value;
    between_ss += d * d;
    within_ss += chain_ses[static_cast<std::size_t>(c)] *
                 chain_ses[static_cast<std::size_t>(c)];
  }
  const double between_se =
      std::sqrt(between_ss / (kChains - 1) / static_cast<double>(kChains));
  const double within_se = std::sqrt(within_ss) / static_cast<double>(kChains);
  const double se_chain = std::max(between_se, within_se);

  const auto& chain = last_chain;
  const auto phis = kernels::eval_over_draws(chain, phi);

  // alpha_hat carries the MC noise of m plus the |G| < tol stopping band;
  // first-hit stopping concentrates the residual near the band edge, so the
  // band sd is taken as tol outright. Both move the expectation through
  // Cov(phi, dlogP/dalpha) scaled by the implicit-function slope.
  const auto sa =
      kernels::eval_over_draws(chain, make_dlogjoint_dalpha_functional(fitted));
  const auto Fs = kernels::eval_over_draws(
      chain, make_occupied_clusters_functional(w));
  const double cov_phi_alpha = posterior_cov_series(phis, sa).value;
  const double dm_da = posterior_cov_series(Fs, sa).value;
  const double dG_total =
      dG_dalpha(sol.alpha_hat, static_cast<std::int64_t>(data.size())) - dm_da;
  const double g_band = solver_config.tol;
  const double se_alpha =
      std::abs(dG_total) > 1e-12
          ? std::sqrt(sol.m_se * sol.m_se + g_band * g_band) / std::abs(dG_total)
          : 0.0;
  out.se = std::sqrt(se_chain * se_chain +
                     cov_phi_alpha * cov_phi_alpha * se_alpha * se_alpha);
  return out;
}

}  // namespace bsens
