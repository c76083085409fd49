// Copyright 2026
// See LICENSE.txt

#pragma once
#include <cstdint>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bsens {

// Maps named state blocks to column ranges of a draw matrix.
struct ChainLayout {
  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  std::vector<Block> blocks;

  std::size_t dim() const noexcept;
  bool has(std::string_view name) const noexcept;
  const Block& block(std::string_view name) const;  // throws DimensionError
};

// One decoded draw: spans into a chain row, resolved through the layout.
class StateView {
 public:
  StateView(const ChainLayout& layout, std::span<const double> row)
      : layout_(&layout), row_(row) {}

  std::span<const double> block(std::string_view name) const;
  double scalar(std::string_view name) const { return block(name)[0]; }
  std::span<const double> raw() const noexcept { return row_; }

 private:
  const ChainLayout* layout_;
  std::span<const double> row_;
};

// S x D matrix of posterior draws, one row per draw, immutable once built.
class SampleChain {
 public:
  SampleChain(ChainLayout layout, std::uint64_t rng_seed, std::string model_tag);

  void append(std::span<const double> row);
  void reserve(std::size_t n_draws);

  std::size_t n_draws() const noexcept { return n_draws_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t s) const;
  StateView state(std::size_t s) const { return StateView(layout_, row(s)); }
  std::vector<double> column(std::size_t j) const;

  const ChainLayout& layout() const noexcept { return layout_; }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }
  const std::string& model_tag() const noexcept { return model_tag_; }

  // Sampler-side diagnostics (acceptance rates etc).
  std::map<std::string, double> diagnostics;

 private:
  ChainLayout layout_;
  std::size_t dim_;
  std::size_t n_draws_ = 0;
  std::vector<double> data_;
  std::uint64_t rng_seed_;
  std::string model_tag_;
};

// Flat CSV, header row names each column "block[i]". Doubles are written with
// 17 significant digits so a reload reproduces them bit-exactly.
void save_chain_csv(const SampleChain& chain, const std::string& path);
SampleChain load_chain_csv(const std::string& path);

// Wraps a raw scalar series as a one-block chain (test and loss-analysis helper).
SampleChain make_scalar_chain(std::vector<double> draws,
                              const std::string& name = "value");

}  // namespace bsens
