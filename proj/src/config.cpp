// Copyright 2026
// See LICENSE.txt

#include "bsens/config.hpp"

#include <cmath>
#include <set>

#include "bsens/errors.hpp"
#include "bsens/toml_lite.hpp"

namespace bsens {

namespace {

class Checker {
 public:
  explicit Checker(const toml::Document& doc) : doc_(doc) {}

  std::vector<std::string> issues;

  void error(const std::string& path, const std::string& msg) {
    issues.push_back(path + ": " + msg);
  }

  double number(const toml::Table& t, const std::string& path,
                const std::string& key, double fallback, bool required = false) {
    const auto* v = t.find(key);
    if (!v) {
      if (required) error(path + "." + key, "missing required field");
      return fallback;
    }
    if (!v->is_number()) {
      error(path + "." + key, "expected a number");
      return fallback;
    }
    return v->num;
  }

  std::string str(const toml::Table& t, const std::string& path,
                  const std::string& key, const std::string& fallback,
                  bool required = false) {
    const auto* v = t.find(key);
    if (!v) {
      if (required) error(path + "." + key, "missing required field");
      return fallback;
    }
    if (!v->is_string()) {
      error(path + "." + key, "expected a string");
      return fallback;
    }
    return v->str;
  }

  bool boolean(const toml::Table& t, const std::string& path,
               const std::string& key, bool fallback) {
    const auto* v = t.find(key);
    if (!v) return fallback;
    if (!v->is_bool()) {
      error(path + "." + key, "expected true/false");
      return fallback;
    }
    return v->b;
  }

  std::int64_t integer(const toml::Table& t, const std::string& path,
                       const std::string& key, std::int64_t fallback,
                       bool required = false) {
    const double d = number(t, path, key, static_cast<double>(fallback), required);
    if (d != std::floor(d)) error(path + "." + key, "expected an integer");
    return static_cast<std::int64_t>(d);
  }

  const toml::Document& doc_;
};

const std::set<std::string> kModelKinds = {"normal_normal", "dp_mixture",
                                           "esb_mixture"};
const std::set<std::string> kTargetKinds = {"case_influence", "hyper", "esb_rho",
                                            "eb", "loss_mean_median"};

bool functional_valid_for(const std::string& functional, const std::string& model) {
  if (model == "normal_normal") return functional == "mu";
  return functional == "first_stick" || functional == "predictive_density" ||
         functional == "occupied_clusters";
}

}  // namespace

ExperimentConfig validate_config(const std::string& path) {
  const toml::Document doc = toml::parse_file(path);
  Checker c(doc);
  ExperimentConfig cfg;

  cfg.name = c.str(doc.root, "", "name", "experiment");

  // --- model
  if (!doc.has_table("model")) {
    c.error("model", "missing [model] block");
  } else {
    const auto& t = doc.tables.at("model");
    cfg.model.kind = c.str(t, "model", "kind", "", true);
    if (!cfg.model.kind.empty() && !kModelKinds.count(cfg.model.kind))
      c.error("model.kind", "unknown model kind '" + cfg.model.kind + "'");
    if (cfg.model.kind == "normal_normal") {
      cfg.model.sigma2 = c.number(t, "model", "sigma2", 1.0);
      cfg.model.mu0 = c.number(t, "model", "mu0", 0.0);
      cfg.model.tau2 = c.number(t, "model", "tau2", 1.0);
      if (!(cfg.model.sigma2 > 0.0)) c.error("model.sigma2", "must be > 0");
      if (!(cfg.model.tau2 > 0.0)) c.error("model.tau2", "must be > 0");
    } else if (cfg.model.kind == "dp_mixture" || cfg.model.kind == "esb_mixture") {
      cfg.model.K = static_cast<int>(c.integer(t, "model", "K", 20));
      cfg.model.comp_prior_var = c.number(t, "model", "comp_prior_var", 25.0);
      cfg.model.obs_var = c.number(t, "model", "obs_var", 1.0);
      if (cfg.model.K < 2) c.error("model.K", "truncation level must be >= 2");
      if (!(cfg.model.comp_prior_var > 0.0))
        c.error("model.comp_prior_var", "must be > 0");
      if (!(cfg.model.obs_var > 0.0)) c.error("model.obs_var", "must be > 0");
      if (cfg.model.kind == "dp_mixture") {
        cfg.model.alpha = c.number(t, "model", "alpha", 1.0);
        if (!(cfg.model.alpha > 0.0)) c.error("model.alpha", "must be > 0");
      } else {
        cfg.model.rho = c.number(t, "model", "rho", 0.0);
        cfg.model.base_mean = c.number(t, "model", "base_mean", 0.0);
        cfg.model.base_var = c.number(t, "model", "base_var", 1.0);
        if (!(cfg.model.rho >= 0.0 && cfg.model.rho < 1.0))
          c.error("model.rho", "must lie in [0, 1)");
        if (!(cfg.model.base_var > 0.0)) c.error("model.base_var", "must be > 0");
      }
    }
  }

  // --- data
  if (!doc.has_table("data")) {
    c.error("data", "missing [data] block");
  } else {
    const auto& t = doc.tables.at("data");
    const auto* vals = t.find("values");
    cfg.data.csv_path = c.str(t, "data", "csv", "");
    cfg.data.csv_has_header = c.boolean(t, "data", "csv_has_header", false);
    if (vals) {
      if (!vals->is_array()) {
        c.error("data.values", "expected an array of numbers");
      } else {
        for (std::size_t i = 0; i < vals->arr.size(); ++i) {
          if (!vals->arr[i].is_number()) {
            c.error("data.values[" + std::to_string(i) + "]", "expected a number");
            continue;
          }
          cfg.data.inline_values.push_back(vals->arr[i].num);
        }
      }
    }
    if (cfg.data.inline_values.empty() && cfg.data.csv_path.empty())
      c.error("data", "provide inline values or a csv path");
    if (!cfg.data.inline_values.empty() && !cfg.data.csv_path.empty())
      c.error("data", "inline values and csv path are mutually exclusive");
  }

  // --- sampler
  if (doc.has_table("sampler")) {
    const auto& t = doc.tables.at("sampler");
    cfg.sampler.n_draws = c.integer(t, "sampler", "n_draws", 10000);
    cfg.sampler.n_burnin = c.integer(t, "sampler", "n_burnin", 1000);
    cfg.sampler.thin = c.integer(t, "sampler", "thin", 1);
    cfg.sampler.seed =
        static_cast<std::uint64_t>(c.integer(t, "sampler", "seed", 0));
    cfg.sampler.mh_step_size = c.number(t, "sampler", "mh_step_size", 0.5);
    if (cfg.sampler.n_draws < 1) c.error("sampler.n_draws", "must be >= 1");
    if (cfg.sampler.n_burnin < 0) c.error("sampler.n_burnin", "must be >= 0");
    if (cfg.sampler.thin < 1) c.error("sampler.thin", "must be >= 1");
    if (!(cfg.sampler.mh_step_size > 0.0))
      c.error("sampler.mh_step_size", "must be > 0");
  }

  // --- targets
  auto it = doc.table_arrays.find("targets");
  if (it == doc.table_arrays.end() || it->second.empty()) {
    c.error("targets", "at least one [[targets]] block is required");
  } else {
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const auto& t = it->second[i];
      const std::string path = "targets[" + std::to_string(i) + "]";
      TargetConfig tc;
      tc.kind = c.str(t, path, "kind", "", true);
      if (!tc.kind.empty() && !kTargetKinds.count(tc.kind)) {
        c.error(path + ".kind", "unknown target kind '" + tc.kind + "'");
      }
      tc.functional = c.str(t, path, "functional", "", true);
      tc.hyper = c.str(t, path, "hyper", "");
      tc.x_star = c.number(t, path, "x_star", 0.0);
      tc.validate_index =
          static_cast<std::size_t>(c.integer(t, path, "validate_index", 0));
      if (t.has("delta_omega"))
        tc.delta_omega = c.number(t, path, "delta_omega", 0.0);

      if (kTargetKinds.count(tc.kind) && kModelKinds.count(cfg.model.kind)) {
        if (!tc.functional.empty() &&
            !functional_valid_for(tc.functional, cfg.model.kind))
          c.error(path + ".functional", "functional '" + tc.functional +
                                            "' does not exist for model kind '" +
                                            cfg.model.kind + "'");
        if (tc.functional == "predictive_density" && !t.has("x_star"))
          c.error(path + ".x_star", "predictive_density requires x_star");
        if (tc.kind == "esb_rho" && cfg.model.kind != "esb_mixture")
          c.error(path + ".kind",
                  "esb_rho requires an esb_mixture model (this model has no"
                  " dependent sticks)");
        if (tc.kind == "eb" && cfg.model.kind != "dp_mixture")
          c.error(path + ".kind", "eb requires a dp_mixture model");
        if (tc.kind == "hyper") {
          const bool ok = (cfg.model.kind == "normal_normal" && tc.hyper == "mu0") ||
                          (cfg.model.kind == "dp_mixture" && tc.hyper == "alpha");
          if (!ok)
            c.error(path + ".hyper", "hyperparameter '" + tc.hyper +
                                         "' does not exist for model kind '" +
                                         cfg.model.kind + "'");
        }
      }
      cfg.targets.push_back(std::move(tc));
    }
  }

  // --- validation
  if (doc.has_table("validation")) {
    const auto& t = doc.tables.at("validation");
    cfg.validation.oracle = c.boolean(t, "validation", "oracle", false);
    cfg.validation.fd_step = c.number(t, "validation", "fd_step", 0.01);
    cfg.validation.scheme = c.str(t, "validation", "scheme", "central");
    cfg.validation.chain_size = c.integer(t, "validation", "chain_size", 20000);
    cfg.validation.common_seed = c.boolean(t, "validation", "common_seed", false);
    if (!(cfg.validation.fd_step > 0.0)) c.error("validation.fd_step", "must be > 0");
    if (cfg.validation.scheme != "central" && cfg.validation.scheme != "forward")
      c.error("validation.scheme", "must be 'central' or 'forward'");
    if (cfg.validation.chain_size < 10)
      c.error("validation.chain_size", "must be >= 10");
  }

  // --- eb solver
  if (doc.has_table("eb")) {
    const auto& t = doc.tables.at("eb");
    cfg.eb.bracket_lo = c.number(t, "eb", "bracket_lo", 1e-3);
    cfg.eb.bracket_hi = c.number(t, "eb", "bracket_hi", 1e3);
    cfg.eb.tol = c.number(t, "eb", "tol", 0.05);
    cfg.eb.solver_draws = c.integer(t, "eb", "solver_draws", 10000);
    if (!(cfg.eb.bracket_lo > 0.0)) c.error("eb.bracket_lo", "must be > 0");
    if (!(cfg.eb.bracket_hi > cfg.eb.bracket_lo))
      c.error("eb.bracket_hi", "must exceed bracket_lo");
    if (!(cfg.eb.tol > 0.0)) c.error("eb.tol", "must be > 0");
    if (cfg.eb.solver_draws < 10) c.error("eb.solver_draws", "must be >= 10");
  }

  // --- output
  if (doc.has_table("output")) {
    const auto& t = doc.tables.at("output");
    cfg.output.dir = c.str(t, "output", "dir", "out");
    cfg.output.dump_chain = c.boolean(t, "output", "dump_chain", false);
  }

  // cross-checks needing the data size are deferred to run time (csv data);
  // inline data can be checked now
  if (!cfg.data.inline_values.empty()) {
    for (const auto& tc : cfg.targets) {
      if ((tc.kind == "case_influence" || tc.kind == "eb") &&
          tc.validate_index >= cfg.data.inline_values.size())
        c.error("targets.validate_index", "index " +
                                              std::to_string(tc.validate_index) +
                                              " exceeds dataset size");
    }
  }

  if (!c.issues.empty()) throw ConfigError("config", c.issues);
  return cfg;
}

}  // namespace bsens
