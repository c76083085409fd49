// Copyright 2026
// See LICENSE.txt

#include "bsens/chain.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bsens/errors.hpp"

namespace bsens {

std::size_t ChainLayout::dim() const noexcept {
  std::size_t d = 0;
  for (const auto& b : blocks) d += b.size;
  return d;
}

bool ChainLayout::has(std::string_view name) const noexcept {
  for (const auto& b : blocks)
    if (b.name == name) return true;
  return false;
}

const ChainLayout::Block& ChainLayout::block(std::string_view name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw DimensionError("chain.layout", "no block named '" + std::string(name) + "'");
}

std::span<const double> StateView::block(std::string_view name) const {
  const auto& b = layout_->block(name);
  return row_.subspan(b.offset, b.size);
}

SampleChain::SampleChain(ChainLayout layout, std::uint64_t rng_seed,
                         std::string model_tag)
    : layout_(std::move(layout)),
      dim_(layout_.dim()),
      rng_seed_(rng_seed),
      model_tag_(std::move(model_tag)) {
  if (dim_ == 0) throw DimensionError("chain", "layout covers zero columns");
  // layout blocks must tile [0, dim) exactly once
  std::size_t expect = 0;
  for (const auto& b : layout_.blocks) {
    if (b.offset != expect)
      throw DimensionError("chain", "layout block '" + b.name + "' misplaced");
    expect += b.size;
  }
}

void SampleChain::reserve(std::size_t n_draws) { data_.reserve(n_draws * dim_); }

void SampleChain::append(std::span<const double> row) {
  if (row.size() != dim_)
    throw DimensionError("chain", "row width " + std::to_string(row.size()) +
                                      " != state dimension " + std::to_string(dim_));
  data_.insert(data_.end(), row.begin(), row.end());
  ++n_draws_;
}

std::span<const double> SampleChain::row(std::size_t s) const {
  if (s >= n_draws_) throw DimensionError("chain", "draw index out of range");
  return {data_.data() + s * dim_, dim_};
}

std::vector<double> SampleChain::column(std::size_t j) const {
  if (j >= dim_) throw DimensionError("chain", "column index out of range");
  std::vector<double> out(n_draws_);
  for (std::size_t s = 0; s < n_draws_; ++s) out[s] = data_[s * dim_ + j];
  return out;
}

void save_chain_csv(const SampleChain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw DomainError("chain.csv", "cannot open " + path + " for writing");
  const auto& layout = chain.layout();
  bool first = true;
  for (const auto& b : layout.blocks) {
    for (std::size_t i = 0; i < b.size; ++i) {
      if (!first) out << ',';
      first = false;
      out << b.name << '[' << i << ']';
    }
  }
  out << '\n';
  char buf[36];
  for (std::size_t s = 0; s < chain.n_draws(); ++s) {
    auto row = chain.row(s);
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace

SampleChain load_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("chain.csv", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("chain.csv", "empty file " + path);

  ChainLayout layout;
  for (const auto& cell : split_csv(line)) {
    auto lb = cell.find('[');
    if (lb == std::string::npos)
      throw DomainError("chain.csv", "malformed header cell '" + cell + "'");
    std::string name = cell.substr(0, lb);
    if (!layout.blocks.empty() && layout.blocks.back().name == name) {
      ++layout.blocks.back().size;
    } else {
      layout.blocks.push_back({name, layout.dim(), 1});
    }
  }

  SampleChain chain(layout, 0, "loaded:" + path);
  std::vector<double> row(layout.dim());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != row.size())
      throw DimensionError("chain.csv", "row width mismatch in " + path);
    for (std::size_t j = 0; j < cells.size(); ++j) row[j] = std::stod(cells[j]);
    chain.append(row);
  }
  return chain;
}

SampleChain make_scalar_chain(std::vector<double> draws, const std::string& name) {
  ChainLayout layout{{{name, 0, 1}}};
  SampleChain chain(layout, 0, "scalar");
  chain.reserve(draws.size());
  for (double v : draws) chain.append({&v, 1});
  return chain;
}

}  // namespace bsens
