// Copyright 2026
// See LICENSE.txt

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <variant>

#include <json.hpp>

#include "bsens/config.hpp"
#include "bsens/diagnostics.hpp"
#include "bsens/empirical_bayes.hpp"
#include "bsens/errors.hpp"
#include "bsens/kernels.hpp"
#include "bsens/loss_sens.hpp"
#include "bsens/oracle.hpp"
#include "bsens/sensitivity.hpp"

namespace bsens {

namespace {

using nlohmann::json;

// NaN/Inf must never reach the report; surface them as runtime errors.
double fin(double x, const std::string& what) {
  if (!std::isfinite(x)) throw NumericError("report", "non-finite " + what, 0);
  return x;
}

json estimate_json(const SensitivityEstimate& est, const std::string& what) {
  return {{"value", fin(est.value, what)},
          {"mc_se", fin(est.mc_se, what + " mc_se")},
          {"ess_used", fin(est.ess_used, what + " ess")},
          {"n_draws", est.n_draws}};
}

std::string fmt17(double x) {
  char buf[36];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct ValidationRow {
  std::string target;
  ComparisonReport rep;
};

using ModelVariant =
    std::variant<NormalNormalModel, TruncatedDPMixtureModel, EsbMixtureModel>;

ModelVariant build_model(const ModelConfig& mc) {
  if (mc.kind == "normal_normal")
    return NormalNormalModel(mc.sigma2, mc.mu0, mc.tau2);
  if (mc.kind == "dp_mixture")
    return TruncatedDPMixtureModel(mc.K, mc.alpha, mc.comp_prior_var, mc.obs_var);
  if (mc.kind == "esb_mixture")
    return EsbMixtureModel(mc.K,
                           DependentStickPrior(mc.rho, mc.base_mean, mc.base_var),
                           mc.comp_prior_var, mc.obs_var);
  throw DomainError("config.model", "unknown model kind '" + mc.kind + "'");
}

SampleChain sample_model(const NormalNormalModel& m, const Dataset& d,
                         const CaseWeights& w, const SamplerConfig& c) {
  return gibbs_normal_normal(m, d, w, c);
}
SampleChain sample_model(const TruncatedDPMixtureModel& m, const Dataset& d,
                         const CaseWeights& w, const SamplerConfig& c) {
  return gibbs_dp_mixture(m, d, w, c);
}
SampleChain sample_model(const EsbMixtureModel& m, const Dataset& d,
                         const CaseWeights& w, const SamplerConfig& c) {
  return gibbs_esb_mixture(m, d, w, c);
}

Functional build_functional(const TargetConfig& tc, const ModelConfig& mc,
                            std::size_t N) {
  if (tc.functional == "mu") return make_coordinate_functional("mu", 0, "mu");
  if (tc.functional == "first_stick")
    return make_coordinate_functional("sticks", 0, "first_stick");
  if (tc.functional == "predictive_density")
    return make_predictive_density_functional(mc.obs_var, tc.x_star);
  if (tc.functional == "occupied_clusters")
    return make_occupied_clusters_functional(CaseWeights::ones(N));
  throw DomainError("config.functional",
                    "unknown functional '" + tc.functional + "'");
}

SampleChain sample_base_chain(const ModelVariant& model, const Dataset& data,
                              const CaseWeights& w, const SamplerConfig& cfg) {
  return std::visit(
      [&](const auto& m) { return sample_model(m, data, w, cfg); },
      model);
}

// refit pipelines ------------------------------------------------------------

SamplerConfig refit_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  SamplerConfig rc = cfg.sampler;
  rc.n_draws = cfg.validation.chain_size;
  rc.seed = seed;
  return rc;
}

PipelineValue sampled_expectation(const ModelVariant& model, const Dataset& data,
                                  const CaseWeights& w, const SamplerConfig& cfg,
                                  const Functional& phi) {
  const auto chain = sample_base_chain(model, data, w, cfg);
  const auto series = kernels::eval_over_draws(chain, phi);
  return {kernels::mean(series), mcse_batch_means(series)};
}

class ExperimentRunner {
 public:
  explicit ExperimentRunner(const ExperimentConfig& cfg)
      : cfg_(cfg),
        data_(cfg.data.inline_values.empty()
                  ? Dataset::from_csv(cfg.data.csv_path, cfg.data.csv_has_header)
                  : Dataset(cfg.data.inline_values)),
        weights_(CaseWeights::ones(data_.size())),
        model_(build_model(cfg.model)) {}

  int run() {
    json report;
    report["experiment"] = cfg_.name;
    report["model_kind"] = cfg_.model.kind;
    report["seed"] = cfg_.sampler.seed;
    report["n_points"] = data_.size();
    report["targets"] = json::array();

    for (std::size_t i = 0; i < cfg_.targets.size(); ++i) {
      const auto& tc = cfg_.targets[i];
      json jt;
      if (tc.kind == "case_influence") jt = run_case_influence(tc, i);
      else if (tc.kind == "hyper") jt = run_hyper(tc, i);
      else if (tc.kind == "esb_rho") jt = run_esb_rho(tc, i);
      else if (tc.kind == "eb") jt = run_eb(tc, i);
      else if (tc.kind == "loss_mean_median") jt = run_loss(tc);
      else throw DomainError("config.targets", "unknown kind '" + tc.kind + "'");
      report["targets"].push_back(std::move(jt));
    }

    namespace fs = std::filesystem;
    fs::create_directories(cfg_.output.dir);
    write_report(report);
    write_metadata();
    if (cfg_.validation.oracle) write_validation_csv();
    if (cfg_.output.dump_chain && base_chain_)
      save_chain_csv(*base_chain_, path("chain.csv"));

    const bool all_consistent =
        std::all_of(rows_.begin(), rows_.end(),
                    [](const ValidationRow& r) { return r.rep.consistent; });
    return all_consistent ? 0 : 1;
  }

 private:
  std::string path(const std::string& f) const {
    return (std::filesystem::path(cfg_.output.dir) / f).string();
  }

  const SampleChain& base_chain() {
    if (!base_chain_) {
      base_chain_ = std::make_unique<SampleChain>(
          sample_base_chain(model_, data_, weights_, cfg_.sampler));
    }
    return *base_chain_;
  }

  std::uint64_t derived_seed(std::size_t target_index, unsigned side) const {
    return cfg_.sampler.seed + 0x9e3779b97f4a7c15ULL *
                                   (2 * static_cast<std::uint64_t>(target_index) +
                                    side + 1);
  }

  FDSpec fd_spec(std::size_t target_index) const {
    FDSpec spec;
    spec.step = cfg_.validation.fd_step;
    spec.scheme = cfg_.validation.scheme == "forward" ? FDSpec::Scheme::forward
                                                      : FDSpec::Scheme::central;
    spec.seed_plus = derived_seed(target_index, 0);
    spec.seed_minus = derived_seed(target_index, 1);
    spec.common_seed = cfg_.validation.common_seed;
    return spec;
  }

  void add_row(const std::string& label, double linear, double linear_se,
               const PipelineValue& oracle, json& jt) {
    const auto rep = compare(linear, linear_se, oracle.value, oracle.se);
    rows_.push_back({label, rep});
    jt["validation"] = {{"oracle_value", fin(rep.oracle_value, "oracle")},
                        {"abs_error", fin(rep.abs_error, "abs_error")},
                        {"combined_se", fin(rep.combined_se, "combined_se")},
                        {"z_score", rep.infinite_z ? json("inf") : json(rep.z_score)},
                        {"verdict", rep.consistent ? "consistent" : "inconsistent"}};
  }

  // --- target kinds ---------------------------------------------------------

  json run_case_influence(const TargetConfig& tc, std::size_t ti) {
    const auto phi = build_functional(tc, cfg_.model, data_.size());
    const auto& chain = base_chain();
    const std::size_t n = tc.validate_index;
    if (n >= data_.size())
      throw DimensionError("config.targets", "validate_index out of range");

    const InfluenceVector infl = std::visit(
        [&](const auto& m) { return case_influence(chain, phi, data_, m); },
        model_);

    const Functional loglik_n = per_point_loglik_functional(n);
    const SensitivityEstimate est = posterior_cov(chain, phi, loglik_n);
    const double base = kernels::mean(kernels::eval_over_draws(chain, phi));

    json jt;
    jt["kind"] = tc.kind;
    jt["functional"] = phi.name;
    jt["base_expectation"] = fin(base, "base expectation");
    json arr = json::array();
    for (double v : infl.per_point) arr.push_back(fin(v, "influence entry"));
    jt["influence"] = std::move(arr);
    jt["validate_index"] = n;
    jt["estimate"] = estimate_json(est, "influence estimate");
    write_influence_csv(ti, infl);
    if (tc.delta_omega) {
      jt["extrapolation"] = {
          {"delta_omega", *tc.delta_omega},
          {"predicted", fin(linear_extrapolate(base, est, *tc.delta_omega),
                            "extrapolation")}};
    }

    if (cfg_.validation.oracle) {
      auto pipeline = [&](double omega, std::uint64_t seed) -> PipelineValue {
        CaseWeights w = weights_;
        w[n] = omega;
        if (cfg_.model.kind == "normal_normal" && tc.functional == "mu") {
          const auto& m = std::get<NormalNormalModel>(model_);
          return {exact_posterior(m, data_, w).mean, 0.0};
        }
        return sampled_expectation(model_, data_, w, refit_config(cfg_, seed), phi);
      };
      const auto fd = fd_derivative(pipeline, 1.0, fd_spec(ti));
      add_row("targets[" + std::to_string(ti) + "]:case_influence[w" +
                  std::to_string(n) + "]",
              est.value, est.mc_se, fd, jt);
    }
    return jt;
  }

  json run_hyper(const TargetConfig& tc, std::size_t ti) {
    const auto phi = build_functional(tc, cfg_.model, data_.size());
    const auto& chain = base_chain();

    Functional score;
    if (tc.hyper == "mu0")
      score = make_dlogjoint_dmu0_functional(std::get<NormalNormalModel>(model_));
    else if (tc.hyper == "alpha")
      score = make_dlogjoint_dalpha_functional(
          std::get<TruncatedDPMixtureModel>(model_));
    else
      throw DomainError("config.targets", "unknown hyper '" + tc.hyper + "'");

    const SensitivityEstimate est = hyper_sensitivity(chain, phi, score);
    const double base = kernels::mean(kernels::eval_over_draws(chain, phi));

    json jt;
    jt["kind"] = tc.kind;
    jt["functional"] = phi.name;
    jt["hyper"] = tc.hyper;
    jt["base_expectation"] = fin(base, "base expectation");
    jt["estimate"] = estimate_json(est, "hyper estimate");
    if (tc.delta_omega) {
      jt["extrapolation"] = {
          {"delta_omega", *tc.delta_omega},
          {"predicted", fin(linear_extrapolate(base, est, *tc.delta_omega),
                            "extrapolation")}};
    }

    if (cfg_.validation.oracle) {
      const double omega0 = tc.hyper == "mu0" ? cfg_.model.mu0 : cfg_.model.alpha;
      auto pipeline = [&](double omega, std::uint64_t seed) -> PipelineValue {
        ModelConfig mc = cfg_.model;
        if (tc.hyper == "mu0") mc.mu0 = omega;
        else mc.alpha = omega;
        const ModelVariant shifted = build_model(mc);
        if (cfg_.model.kind == "normal_normal" && tc.functional == "mu") {
          const auto& m = std::get<NormalNormalModel>(shifted);
          return {exact_posterior(m, data_, weights_).mean, 0.0};
        }
        return sampled_expectation(shifted, data_, weights_,
                                   refit_config(cfg_, seed), phi);
      };
      const auto fd = fd_derivative(pipeline, omega0, fd_spec(ti));
      add_row("targets[" + std::to_string(ti) + "]:hyper[" + tc.hyper + "]",
              est.value, est.mc_se, fd, jt);
    }
    return jt;
  }

  json run_esb_rho(const TargetConfig& tc, std::size_t ti) {
    const auto phi = build_functional(tc, cfg_.model, data_.size());
    const auto& chain = base_chain();
    const auto& model = std::get<EsbMixtureModel>(model_);

    const SensitivityEstimate est = esb_rho_sensitivity(chain, phi, model.stick_prior);
    const double base = kernels::mean(kernels::eval_over_draws(chain, phi));

    json jt;
    jt["kind"] = tc.kind;
    jt["functional"] = phi.name;
    jt["rho0"] = model.stick_prior.rho;
    jt["base_expectation"] = fin(base, "base expectation");
    jt["estimate"] = estimate_json(est, "esb_rho estimate");
    jt["stick_mh_acceptance"] = chain.diagnostics.count("acceptance_rate")
                                    ? chain.diagnostics.at("acceptance_rate")
                                    : 0.0;

    if (cfg_.validation.oracle) {
      auto pipeline = [&](double rho, std::uint64_t seed) -> PipelineValue {
        EsbMixtureModel shifted(model.K, model.stick_prior.with_rho(rho),
                                model.comp_prior_var, model.obs_var);
        return sampled_expectation(ModelVariant(shifted), data_, weights_,
                                   refit_config(cfg_, seed), phi);
      };
      const auto fd = fd_derivative(pipeline, model.stick_prior.rho, fd_spec(ti));
      add_row("targets[" + std::to_string(ti) + "]:esb_rho", est.value, est.mc_se,
              fd, jt);
    }
    return jt;
  }

  json run_eb(const TargetConfig& tc, std::size_t ti) {
    const auto phi = build_functional(tc, cfg_.model, data_.size());
    const auto& model = std::get<TruncatedDPMixtureModel>(model_);
    const std::size_t n = tc.validate_index;
    if (n >= data_.size())
      throw DimensionError("config.targets", "validate_index out of range");

    EBSolverConfig solver;
    solver.bracket_lo = cfg_.eb.bracket_lo;
    solver.bracket_hi = cfg_.eb.bracket_hi;
    solver.tol = cfg_.eb.tol;

    SamplerConfig solver_chains = cfg_.sampler;
    solver_chains.n_draws = cfg_.eb.solver_draws;

    const EBSolution sol = solve_eb(model, data_, weights_, solver_chains, solver);
    TruncatedDPMixtureModel fitted(model.K, sol.alpha_hat, model.comp_prior_var,
                                   model.obs_var);
    SamplerConfig ecfg = cfg_.sampler;
    ecfg.seed = cfg_.sampler.seed ^ 0x51ed2701a6b3c48dULL;
    const auto chain = gibbs_dp_mixture(fitted, data_, weights_, ecfg);

    const auto F = make_occupied_clusters_functional(weights_);
    const auto breakdown = eb_sensitivity(chain, phi, F, fitted, data_, weights_,
                                          OmegaSpec::case_weight(n));
    const double base = kernels::mean(kernels::eval_over_draws(chain, phi));

    json jt;
    jt["kind"] = tc.kind;
    jt["functional"] = phi.name;
    jt["omega"] = "w" + std::to_string(n);
    jt["base_expectation"] = fin(base, "base expectation");
    jt["solution"] = {{"alpha_hat", fin(sol.alpha_hat, "alpha_hat")},
                      {"residual", fin(sol.residual, "residual")},
                      {"iterations", sol.iterations},
                      {"bracket_lo", fin(sol.bracket_lo, "bracket_lo")},
                      {"bracket_hi", fin(sol.bracket_hi, "bracket_hi")},
                      {"m_hat", fin(sol.m_hat, "m_hat")},
                      {"m_se", fin(sol.m_se, "m_se")}};
    jt["breakdown"] = {
        {"total", fin(breakdown.total, "total")},
        {"total_se", fin(breakdown.total_se, "total_se")},
        {"direct_term", fin(breakdown.direct_term, "direct_term")},
        {"indirect_term", fin(breakdown.indirect_term, "indirect_term")},
        {"dalpha_domega", fin(breakdown.dalpha_domega, "dalpha_domega")},
        {"dG_dalpha_total", fin(breakdown.dG_dalpha_total, "dG_dalpha_total")},
        {"dG_dm", breakdown.dG_dm},
        {"dm_dalpha", estimate_json(breakdown.dm_dalpha, "dm_dalpha")},
        {"dm_domega", estimate_json(breakdown.dm_domega, "dm_domega")}};

    if (cfg_.validation.oracle) {
      auto pipeline = [&](double omega, std::uint64_t seed) -> PipelineValue {
        CaseWeights w = weights_;
        w[n] = omega;
        return eb_refit_expectation(model, data_, w, solver_chains, ecfg, solver,
                                    phi, seed);
      };
      const auto fd = fd_derivative(pipeline, 1.0, fd_spec(ti));
      add_row("targets[" + std::to_string(ti) + "]:eb[w" + std::to_string(n) + "]",
              breakdown.total, breakdown.total_se, fd, jt);
    }
    return jt;
  }

  json run_loss(const TargetConfig& tc) {
    const auto phi = build_functional(tc, cfg_.model, data_.size());
    const auto& chain = base_chain();
    const auto series = kernels::eval_over_draws(chain, phi);

    const double mean = kernels::mean(series);
    const double approx = mean_median_approx(chain, phi);
    const double via_loss =
        loss_sensitivity_at(chain, phi, mean_to_median_loss(), mean);

    json jt;
    jt["kind"] = tc.kind;
    jt["functional"] = phi.name;
    jt["loss_sensitivity"] = {
        {"posterior_mean", fin(mean, "posterior mean")},
        {"linear_approximation", fin(approx, "mean_median_approx")},
        {"via_loss_derivative", fin(via_loss, "loss derivative")}};
    if (cfg_.validation.oracle) {
      // the "refit" for the loss path is the direct order-statistic median
      std::vector<double> sorted(series.begin(), series.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t S = sorted.size();
      const double median = (S % 2 == 1)
                                ? sorted[S / 2]
                                : 0.5 * (sorted[S / 2 - 1] + sorted[S / 2]);
      jt["loss_sensitivity"]["exact_refit"] = fin(median - mean, "median - mean");
    }
    return jt;
  }

  // marginal per-point log likelihood of datapoint n as a functional
  Functional per_point_loglik_functional(std::size_t n) const {
    const double x = data_.points[n];
    if (cfg_.model.kind == "normal_normal") {
      const auto m = std::get<NormalNormalModel>(model_);
      return {"loglik[" + std::to_string(n) + "]", [m, x](const StateView& s) {
                return per_point_loglik(m, s.scalar("mu"), x);
              }};
    }
    const double obs_var = cfg_.model.obs_var;
    return make_marginal_loglik_functional(obs_var, x, n);
  }

  // --- outputs ---------------------------------------------------------------

  void write_report(const json& report) {
    std::ofstream out(path("report.json"), std::ios::binary);
    if (!out) throw DomainError("report", "cannot write " + path("report.json"));
    out << report.dump(2) << '\n';
  }

  void write_metadata() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    json meta;
    meta["experiment"] = cfg_.name;
    meta["written_at_unix"] = static_cast<std::int64_t>(t);
    std::ofstream out(path("metadata.json"), std::ios::binary);
    out << meta.dump(2) << '\n';
  }

  // plot-ready per-datapoint influence table
  void write_influence_csv(std::size_t target_index, const InfluenceVector& infl) {
    namespace fsys = std::filesystem;
    fsys::create_directories(cfg_.output.dir);
    const std::string name = cfg_.targets.size() > 1
                                 ? "influence_" + std::to_string(target_index) + ".csv"
                                 : "influence.csv";
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw DomainError("report", "cannot write " + path(name));
    out << "index,x,influence\n";
    for (std::size_t n = 0; n < infl.per_point.size(); ++n)
      out << n << ',' << fmt17(data_.points[n]) << ','
          << fmt17(infl.per_point[n]) << '\n';
  }

  void write_validation_csv() {
    std::ofstream out(path("validation.csv"), std::ios::binary);
    if (!out)
      throw DomainError("report", "cannot write " + path("validation.csv"));
    out << "experiment,target,linear,oracle,abs_error,combined_se,z,verdict\n";
    for (const auto& row : rows_) {
      out << cfg_.name << ',' << row.target << ',' << fmt17(row.rep.linear_estimate)
          << ',' << fmt17(row.rep.oracle_value) << ',' << fmt17(row.rep.abs_error)
          << ',' << fmt17(row.rep.combined_se) << ','
          << (row.rep.infinite_z ? "inf" : fmt17(row.rep.z_score)) << ','
          << (row.rep.consistent ? "consistent" : "inconsistent") << '\n';
    }
  }

  const ExperimentConfig& cfg_;
  Dataset data_;
  CaseWeights weights_;
  ModelVariant model_;
  std::unique_ptr<SampleChain> base_chain_;
  std::vector<ValidationRow> rows_;
};

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  try {
    ExperimentRunner runner(config);
    return runner.run();
  } catch (const Error& e) {
    std::cerr << "error [" << e.where() << "] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [unexpected] " << e.what() << '\n';
    return 2;
  }
}

}  // namespace bsens
