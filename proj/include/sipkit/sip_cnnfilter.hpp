#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sipkit/image.hpp"

namespace sipkit {

/// First-layer convolution filters, weights in filter, channel, row, column order.
struct FilterBank {
  std::size_t num_filters = 0;
  std::size_t channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::vector<float> weights;
  std::vector<float> biases;

  float weight(std::size_t f, std::size_t c, std::size_t ky, std::size_t kx) const {
    return weights[((f * channels + c) * kernel_h + ky) * kernel_w + kx];
  }
};

/// Max-pooled ReLU responses, one pool_h x pool_w map per filter.
struct PooledMaps {
  std::size_t num_maps = 0;
  std::size_t pool_h = 0;
  std::size_t pool_w = 0;
  std::vector<double> values;  // map-major, then row-major

  double at(std::size_t m, std::size_t y, std::size_t x) const { return values[(m * pool_h + y) * pool_w + x]; }
};

// FILB v1 reader/writer. The reader throws FormatError on a bad magic or
// version, TruncatedFile when the payload is short and DimensionMismatch on
// zero dimensions or trailing bytes.
FilterBank load_filter_bank(const std::filesystem::path& path);
void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path);

/// Seeded Gaussian filters; used for fixtures and tests.
FilterBank random_filter_bank(std::size_t num_filters, std::size_t kernel, std::size_t stride, std::uint64_t seed);

inline constexpr std::size_t kCnnInputSize = 227;

// Valid-padding strided convolution + bias + ReLU, then max pooling over a
// pool_grid x pool_grid tiling (grid clamped to the map size; the last tile on
// each axis absorbs the remainder). No resizing is done here.
PooledMaps convolve_pool(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid = 12);

// Resizes to 227x227 and runs convolve_pool.
PooledMaps pooled_responses(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid = 12);

enum class Axis { LeftRight, UpDown };

// 1 - sum|R - R'| / (sum|R| + sum|R'|) with R' the responses to the flipped
// image. Filters are not mirrored. Returns 1 when both sums vanish.
double symmetry(const RgbImage& img, const FilterBank& bank, Axis axis, std::size_t pool_grid = 12);
double symmetry_from_maps(const PooledMaps& original, const PooledMaps& flipped);

/// Median over maps of the per-map population variance.
double sparseness(const PooledMaps& maps);
/// Population variance over every pooled entry.
double variability(const PooledMaps& maps);

struct CnnFilterSips {
  double symmetry_lr = 0.0;
  double symmetry_ud = 0.0;
  double sparseness = 0.0;
  double variability = 0.0;
};

// All four filter-response SIPs from three convolutions (original and both flips).
CnnFilterSips cnn_filter_sips(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid = 12);

}  // namespace sipkit
