// Copyright 2026
// See LICENSE.txt

#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace bsens {

// Observed scalar data x_1..x_N.
struct Dataset {
  std::vector<double> points;

  Dataset() = default;
  explicit Dataset(std::vector<double> pts);

  std::size_t size() const noexcept { return points.size(); }

  // Single-column CSV, optional header row.
  static Dataset from_csv(const std::string& path, bool has_header);
};

// Per-datapoint likelihood weights. All-ones is the unperturbed model;
// w_n = 0 deletes point n, integers replicate. Arbitrary reals are allowed
// so weight paths can be differentiated numerically.
struct CaseWeights {
  std::vector<double> w;

  CaseWeights() = default;
  explicit CaseWeights(std::vector<double> weights);

  static CaseWeights ones(std::size_t n) {
    return CaseWeights(std::vector<double>(n, 1.0));
  }

  std::size_t size() const noexcept { return w.size(); }
  double operator[](std::size_t i) const { return w[i]; }
  double& operator[](std::size_t i) { return w[i]; }

  void check_matches(std::size_t data_size, const std::string& where) const;
};

}  // namespace bsens
