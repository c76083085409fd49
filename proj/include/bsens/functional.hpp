// Copyright 2026
// See LICENSE.txt

#pragma once
#include <functional>
#include <string>
#include <utility>

#include "bsens/chain.hpp"

namespace bsens {

// A scalar quantity of interest evaluated on one posterior draw. Pure: the
// result depends only on the state passed in.
struct Functional {
  std::string name;
  std::function<double(const StateView&)> eval;

  double operator()(const StateView& s) const { return eval(s); }
};

inline Functional make_constant_functional(double c) {
  return {"const", [c](const StateView&) { return c; }};
}

inline Functional make_coordinate_functional(std::string block, std::size_t idx,
                                             std::string name) {
  return {std::move(name), [b = std::move(block), idx](const StateView& s) {
            return s.block(b)[idx];
          }};
}

}  // namespace bsens
