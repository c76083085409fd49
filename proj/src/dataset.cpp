// Copyright 2026
// See LICENSE.txt

#include "bsens/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bsens/errors.hpp"

namespace bsens {

Dataset::Dataset(std::vector<double> pts) : points(std::move(pts)) {
  if (points.empty())
    throw DomainError("dataset", "dataset must contain at least one point");
  for (std::size_t n = 0; n < points.size(); ++n)
    if (!std::isfinite(points[n]))
      throw NumericError("dataset", "non-finite observation", n);
}

Dataset Dataset::from_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DomainError("dataset.csv", "cannot open " + path);
  std::vector<double> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && has_header) {
      first = false;
      continue;
    }
    first = false;
    // strip trailing CR and whitespace
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw DomainError("dataset.csv", "unparseable row '" + line + "' in " + path);
    }
    pts.push_back(v);
  }
  return Dataset(std::move(pts));
}

CaseWeights::CaseWeights(std::vector<double> weights) : w(std::move(weights)) {
  for (std::size_t n = 0; n < w.size(); ++n)
    if (!std::isfinite(w[n]))
      throw NumericError("case_weights", "non-finite weight", n);
}

void CaseWeights::check_matches(std::size_t data_size,
                                const std::string& where) const {
  if (w.size() != data_size)
    throw DimensionError(where, "weights length " + std::to_string(w.size()) +
                                    " != dataset size " + std::to_string(data_size));
}

}  // namespace bsens
