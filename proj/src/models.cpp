// Copyright 2026
// See LICENSE.txt

#include "bsens/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bsens/errors.hpp"
#include "bsens/math.hpp"

namespace bsens {

NormalNormalModel::NormalNormalModel(double sigma2_, double mu0_, double tau2_)
    : sigma2(sigma2_), mu0(mu0_), tau2(tau2_) {
  if (!(sigma2 > 0.0)) throw DomainError("models.normal_normal", "sigma2 must be > 0");
  if (!(tau2 > 0.0)) throw DomainError("models.normal_normal", "tau2 must be > 0");
  if (!std::isfinite(mu0)) throw DomainError("models.normal_normal", "mu0 not finite");
}

TruncatedDPMixtureModel::TruncatedDPMixtureModel(int K_, double alpha_,
                                                 double comp_prior_var_,
                                                 double obs_var_)
    : K(K_), alpha(alpha_), comp_prior_var(comp_prior_var_), obs_var(obs_var_) {
  if (K < 2) throw DomainError("models.dp_mixture", "truncation K must be >= 2");
  if (!(alpha > 0.0)) throw DomainError("models.dp_mixture", "alpha must be > 0");
  if (!(comp_prior_var > 0.0))
    throw DomainError("models.dp_mixture", "comp_prior_var must be > 0");
  if (!(obs_var > 0.0)) throw DomainError("models.dp_mixture", "obs_var must be > 0");
}

DependentStickPrior::DependentStickPrior(double rho_, double base_mean_,
                                         double base_var_)
    : rho(rho_), base_mean(base_mean_), base_var(base_var_) {
  if (!(base_var > 0.0))
    throw DomainError("models.stick_prior", "base_var must be > 0");
  if (!(rho < 1.0) || !std::isfinite(rho))
    throw DomainError("models.stick_prior", "rho must be < 1");
}

DependentStickPrior DependentStickPrior::with_rho(double new_rho) const {
  return DependentStickPrior(new_rho, base_mean, base_var);
}

EsbMixtureModel::EsbMixtureModel(int K_, DependentStickPrior prior,
                                 double comp_prior_var_, double obs_var_)
    : K(K_), stick_prior(prior), comp_prior_var(comp_prior_var_), obs_var(obs_var_) {
  if (K < 2) throw DomainError("models.esb_mixture", "truncation K must be >= 2");
  if (!(comp_prior_var > 0.0))
    throw DomainError("models.esb_mixture", "comp_prior_var must be > 0");
  if (!(obs_var > 0.0)) throw DomainError("models.esb_mixture", "obs_var must be > 0");
}

std::vector<double> stick_weights(std::span<const double> sticks) {
  std::vector<double> pi(sticks.size());
  double remaining = 1.0;
  for (std::size_t k = 0; k < sticks.size(); ++k) {
    pi[k] = sticks[k] * remaining;
    remaining *= (1.0 - sticks[k]);
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Dependent stick prior: equicorrelated Gaussian on logit(v).

namespace {

struct EquiCorr {
  // Pieces of the equicorrelated MVN with d coordinates and correlation rho.
  double d, one_minus, trace_coef;
};

void check_sticks_interior(std::span<const double> sticks, const char* where) {
  for (std::size_t k = 0; k < sticks.size(); ++k)
    if (!(sticks[k] > 0.0) || !(sticks[k] < 1.0))
      throw SingularityError(where, "stick on the boundary of (0,1)", k);
}

void check_rho_pd(double rho, std::size_t d, const char* where) {
  // positive-definite range of the equicorrelation matrix
  if (d >= 2 && !(rho > -1.0 / (static_cast<double>(d) - 1.0)))
    throw DomainError(where, "rho leaves the correlation matrix singular");
}

}  // namespace

double DependentStickPrior::log_density(std::span<const double> sticks) const {
  const std::size_t d = sticks.size();
  if (d == 0) throw DimensionError("models.stick_prior", "no sticks supplied");
  check_sticks_interior(sticks, "models.stick_prior");
  check_rho_pd(rho, d, "models.stick_prior");

  const double dd = static_cast<double>(d);
  double Q = 0.0, T = 0.0, jac = 0.0;
  for (double v : sticks) {
    const double u = logit(v) - base_mean;
    Q += u * u;
    T += u;
    jac -= std::log(v) + std::log1p(-v);
  }
  // det R = (1-rho)^{d-1} (1 + (d-1) rho);  R^{-1} = [I - rho/(1+(d-1)rho) J]/(1-rho)
  const double tail = 1.0 + (dd - 1.0) * rho;
  double logdet = dd * std::log(base_var);
  double quad = Q;
  if (d >= 2) {
    logdet += (dd - 1.0) * std::log1p(-rho) + std::log(tail);
    quad = (Q - rho * T * T / tail) / (1.0 - rho);
  }
  return -0.5 * (dd * kLog2Pi + logdet + quad / base_var) + jac;
}

double dlogstickprior_drho(const DependentStickPrior& prior,
                           std::span<const double> sticks) {
  const std::size_t d = sticks.size();
  if (d == 0) throw DimensionError("models.stick_prior", "no sticks supplied");
  if (!(prior.rho >= 0.0) || !(prior.rho < 1.0))
    throw DomainError("models.stick_prior", "rho outside [0,1)");
  check_sticks_interior(sticks, "models.stick_prior");
  if (d == 1) return 0.0;  // a single coordinate has no correlation structure

  const double dd = static_cast<double>(d);
  const double rho = prior.rho;
  double Q = 0.0, T = 0.0;
  for (double v : sticks) {
    const double u = logit(v) - prior.base_mean;
    Q += u * u;
    T += u;
  }
  const double tail = 1.0 + (dd - 1.0) * rho;
  const double om = 1.0 - rho;
  // d/drho log det = -(d-1)/(1-rho) + (d-1)/tail
  const double dlogdet = (dd - 1.0) * (1.0 / tail - 1.0 / om);
  // quad(rho) = [Q - rho T^2 / tail] / (1-rho)
  const double dquad = (Q - rho * T * T / tail) / (om * om) - T * T / (om * tail * tail);
  return -0.5 * (dlogdet + dquad / prior.base_var);
}

// ---------------------------------------------------------------------------
// Per-point log likelihoods

double per_point_loglik(const NormalNormalModel& model, double mu, double x) {
  const double ll = log_normal_pdf(x, mu, model.sigma2);
  if (!std::isfinite(ll))
    throw NumericError("models.normal_normal", "non-finite log likelihood", 0);
  return ll;
}

double per_point_loglik(std::span<const double> sticks,
                        std::span<const double> comp_means, double obs_var,
                        double x) {
  const std::size_t K = sticks.size();
  std::vector<double> terms(K);
  const auto pi = stick_weights(sticks);
  for (std::size_t k = 0; k < K; ++k) {
    terms[k] = (pi[k] > 0.0)
                   ? std::log(pi[k]) + log_normal_pdf(x, comp_means[k], obs_var)
                   : -std::numeric_limits<double>::infinity();
  }
  const double ll = logsumexp(terms);
  if (!std::isfinite(ll))
    throw NumericError("models.mixture", "non-finite mixture log likelihood", 0);
  return ll;
}

double per_point_loglik(const TruncatedDPMixtureModel& model,
                        const MixtureState& state, double x) {
  return per_point_loglik(state.sticks, state.comp_means, model.obs_var, x);
}

double per_point_loglik(const EsbMixtureModel& model, const MixtureState& state,
                        double x) {
  return per_point_loglik(state.sticks, state.comp_means, model.obs_var, x);
}

double complete_data_loglik(const MixtureState& state, double obs_var, double x,
                            int z) {
  const auto pi = stick_weights(state.sticks);
  if (z < 0 || z >= static_cast<int>(pi.size()))
    throw DimensionError("models.mixture", "assignment out of range");
  return std::log(pi[static_cast<std::size_t>(z)]) +
         log_normal_pdf(x, state.comp_means[static_cast<std::size_t>(z)], obs_var);
}

// ---------------------------------------------------------------------------
// Priors and log joints

double log_prior(const NormalNormalModel& model, double mu) {
  return log_normal_pdf(mu, model.mu0, model.tau2);
}

namespace {

double comp_means_log_prior(std::span<const double> comp_means, double var) {
  double lp = 0.0;
  for (double m : comp_means) lp += log_normal_pdf(m, 0.0, var);
  return lp;
}

void check_truncation(const MixtureState& state, int K, const char* where) {
  if (state.K() != K || static_cast<int>(state.comp_means.size()) != K)
    throw DimensionError(where, "state dimensions do not match truncation level");
  if (state.sticks.back() != 1.0)
    throw DomainError(where, "final stick must equal 1 under truncation");
}

}  // namespace

double log_prior(const TruncatedDPMixtureModel& model, const MixtureState& state) {
  check_truncation(state, model.K, "models.dp_mixture");
  double lp = 0.0;
  for (int k = 0; k + 1 < model.K; ++k) {
    const double v = state.sticks[static_cast<std::size_t>(k)];
    if (!(v > 0.0) || !(v < 1.0))
      throw SingularityError("models.dp_mixture", "free stick on boundary",
                             static_cast<std::size_t>(k));
    lp += log_beta_pdf(v, 1.0, model.alpha);
  }
  return lp + comp_means_log_prior(state.comp_means, model.comp_prior_var);
}

double log_prior(const EsbMixtureModel& model, const MixtureState& state) {
  check_truncation(state, model.K, "models.esb_mixture");
  std::span<const double> free(state.sticks.data(),
                               static_cast<std::size_t>(model.K - 1));
  return model.stick_prior.log_density(free) +
         comp_means_log_prior(state.comp_means, model.comp_prior_var);
}

namespace {

template <typename PerPoint>
double weighted_sum_loglik(const Dataset& data, const CaseWeights& w,
                           PerPoint&& per_point, const char* where) {
  w.check_matches(data.size(), where);
  double s = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (w[n] == 0.0) continue;  // a zero weight deletes the point outright
    const double term = w[n] * per_point(data.points[n]);
    if (!std::isfinite(term))
      throw NumericError(where, "non-finite weighted likelihood term", n);
    s += term;
  }
  return s;
}

}  // namespace

double weighted_log_joint(const NormalNormalModel& model, double mu,
                          const Dataset& data, const CaseWeights& w) {
  const double lik = weighted_sum_loglik(
      data, w, [&](double x) { return per_point_loglik(model, mu, x); },
      "models.normal_normal");
  return lik + log_prior(model, mu);
}

double weighted_log_joint(const TruncatedDPMixtureModel& model,
                          const MixtureState& state, const Dataset& data,
                          const CaseWeights& w) {
  const double lik = weighted_sum_loglik(
      data, w, [&](double x) { return per_point_loglik(model, state, x); },
      "models.dp_mixture");
  return lik + log_prior(model, state);
}

double weighted_log_joint(const EsbMixtureModel& model, const MixtureState& state,
                          const Dataset& data, const CaseWeights& w) {
  const double lik = weighted_sum_loglik(
      data, w, [&](double x) { return per_point_loglik(model, state, x); },
      "models.esb_mixture");
  return lik + log_prior(model, state);
}

// ---------------------------------------------------------------------------
// Analytic hyperparameter scores

double dlogjoint_dalpha(double alpha, std::span<const double> free_sticks) {
  if (!(alpha > 0.0)) throw DomainError("models.dp_mixture", "alpha must be > 0");
  double s = 0.0;
  for (std::size_t k = 0; k < free_sticks.size(); ++k) {
    const double v = free_sticks[k];
    if (!(v < 1.0))
      throw SingularityError("models.dp_mixture", "log(1-v) undefined at v=1", k);
    s += 1.0 / alpha + std::log1p(-v);
  }
  return s;
}

double dlogjoint_dalpha(const TruncatedDPMixtureModel& model,
                        const MixtureState& state) {
  check_truncation(state, model.K, "models.dp_mixture");
  std::span<const double> free(state.sticks.data(),
                               static_cast<std::size_t>(model.K - 1));
  return dlogjoint_dalpha(model.alpha, free);
}

double dlogjoint_dmu0(const NormalNormalModel& model, double mu) {
  return (mu - model.mu0) / model.tau2;
}

// ---------------------------------------------------------------------------
// Conjugate posterior

PosteriorMoments exact_posterior(const NormalNormalModel& model,
                                 const Dataset& data, const CaseWeights& w) {
  w.check_matches(data.size(), "models.exact_posterior");
  double wsum = 0.0, wxsum = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    wsum += w[n];
    wxsum += w[n] * data.points[n];
  }
  const double precision = wsum / model.sigma2 + 1.0 / model.tau2;
  if (!(precision > 0.0))
    throw DomainError("models.exact_posterior", "degenerate posterior precision");
  PosteriorMoments out;
  out.variance = 1.0 / precision;
  out.mean = (wxsum / model.sigma2 + model.mu0 / model.tau2) * out.variance;
  return out;
}

// ---------------------------------------------------------------------------
// Layouts and state codecs

ChainLayout normal_normal_layout() { return ChainLayout{{{"mu", 0, 1}}}; }

ChainLayout mixture_layout(int K, std::size_t N) {
  const auto k = static_cast<std::size_t>(K);
  return ChainLayout{{{"sticks", 0, k},
                      {"comp_means", k, k},
                      {"assignments", 2 * k, N}}};
}

MixtureState decode_mixture_state(const StateView& s) {
  MixtureState out;
  auto sticks = s.block("sticks");
  auto means = s.block("comp_means");
  auto z = s.block("assignments");
  out.sticks.assign(sticks.begin(), sticks.end());
  out.comp_means.assign(means.begin(), means.end());
  out.assignments.resize(z.size());
  for (std::size_t n = 0; n < z.size(); ++n)
    out.assignments[n] = static_cast<int>(z[n]);
  return out;
}

std::vector<double> encode_mixture_state(const MixtureState& state) {
  std::vector<double> row;
  row.reserve(state.sticks.size() + state.comp_means.size() +
              state.assignments.size());
  row.insert(row.end(), state.sticks.begin(), state.sticks.end());
  row.insert(row.end(), state.comp_means.begin(), state.comp_means.end());
  for (int z : state.assignments) row.push_back(static_cast<double>(z));
  return row;
}

// ---------------------------------------------------------------------------
// Functional factories

Functional make_predictive_density_functional(double obs_var, double x_star) {
  return {"predictive_density", [obs_var, x_star](const StateView& s) {
            auto sticks = s.block("sticks");
            auto means = s.block("comp_means");
            const auto pi = stick_weights(sticks);
            double dens = 0.0;
            for (std::size_t k = 0; k < pi.size(); ++k)
              dens += pi[k] * std::exp(log_normal_pdf(x_star, means[k], obs_var));
            return dens;
          }};
}

Functional make_occupied_clusters_functional(const CaseWeights& w) {
  return {"occupied_clusters", [w](const StateView& s) {
            auto z = s.block("assignments");
            std::set<int> occupied;
            for (std::size_t n = 0; n < z.size(); ++n)
              if (n >= w.size() || w[n] != 0.0)
                occupied.insert(static_cast<int>(z[n]));
            return static_cast<double>(occupied.size());
          }};
}

Functional make_dlogjoint_dalpha_functional(const TruncatedDPMixtureModel& model) {
  const double alpha = model.alpha;
  const auto free_count = static_cast<std::size_t>(model.K - 1);
  return {"dlogjoint_dalpha", [alpha, free_count](const StateView& s) {
            auto sticks = s.block("sticks");
            return dlogjoint_dalpha(alpha, sticks.subspan(0, free_count));
          }};
}

Functional make_dlogjoint_dmu0_functional(const NormalNormalModel& model) {
  return {"dlogjoint_dmu0",
          [model](const StateView& s) { return dlogjoint_dmu0(model, s.scalar("mu")); }};
}

Functional make_stick_rho_score_functional(const DependentStickPrior& prior) {
  return {"dlogstickprior_drho", [prior](const StateView& s) {
            auto sticks = s.block("sticks");
            return dlogstickprior_drho(prior, sticks.subspan(0, sticks.size() - 1));
          }};
}

Functional make_weight_score_functional(double obs_var, double x_n, std::size_t n) {
  return {"dlogjoint_dw[" + std::to_string(n) + "]",
          [obs_var, x_n, n](const StateView& s) {
            auto z = s.block("assignments");
            const auto state = decode_mixture_state(s);
            return complete_data_loglik(state, obs_var, x_n,
                                        static_cast<int>(z[n]));
          }};
}

Functional make_marginal_loglik_functional(double obs_var, double x_n,
                                           std::size_t n) {
  return {"loglik[" + std::to_string(n) + "]",
          [obs_var, x_n](const StateView& s) {
            return per_point_loglik(s.block("sticks"), s.block("comp_means"),
                                    obs_var, x_n);
          }};
}

}  // namespace bsens
