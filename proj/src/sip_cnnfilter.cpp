#include "sipkit/sip_cnnfilter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "sipkit/binary_io.hpp"
#include "sipkit/error.hpp"
#include "sipkit/random.hpp"

namespace sipkit {

namespace {

constexpr std::uint32_t kFilbVersion = 1;

std::vector<std::size_t> tile_bounds(std::size_t n, std::size_t grid) {
  const std::size_t g = std::min(grid, n);
  const std::size_t step = n / g;
  std::vector<std::size_t> b(g + 1);
  for (std::size_t k = 0; k < g; ++k) b[k] = k * step;
  b[g] = n;
  return b;
}

double population_variance(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += v[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (v[i] - mean) * (v[i] - mean);
  return ss / static_cast<double>(n);
}

}  // namespace

FilterBank load_filter_bank(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader in(bytes);
  if (bytes.size() < 4 || in.magic(4) != "FILB") throw Error(ErrorCode::FormatError, path.string() + ": bad magic");
  const auto version = in.u32("version");
  if (version != kFilbVersion) {
    throw Error(ErrorCode::FormatError, path.string() + ": unsupported version " + std::to_string(version));
  }
  FilterBank bank;
  bank.num_filters = in.u32("num_filters");
  bank.channels = in.u32("channels");
  bank.kernel_h = in.u32("kernel_h");
  bank.kernel_w = in.u32("kernel_w");
  bank.stride = in.u32("stride");
  if (bank.num_filters == 0 || bank.channels == 0 || bank.kernel_h == 0 || bank.kernel_w == 0 || bank.stride == 0) {
    throw Error(ErrorCode::DimensionMismatch, path.string() + ": zero dimension in header");
  }
  const std::size_t nw = bank.num_filters * bank.channels * bank.kernel_h * bank.kernel_w;
  in.need(4 * (nw + bank.num_filters), "filter payload");
  bank.weights.resize(nw);
  for (auto& w : bank.weights) w = in.f32("weights");
  bank.biases.resize(bank.num_filters);
  for (auto& b : bank.biases) b = in.f32("biases");
  if (in.remaining() != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                path.string() + ": " + std::to_string(in.remaining()) + " trailing bytes after payload");
  }
  for (float w : bank.weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::NonFiniteData, path.string() + ": non-finite weight");
  }
  return bank;
}

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path) {
  detail::ByteWriter out;
  out.raw("FILB");
  out.u32(kFilbVersion);
  out.u32(static_cast<std::uint32_t>(bank.num_filters));
  out.u32(static_cast<std::uint32_t>(bank.channels));
  out.u32(static_cast<std::uint32_t>(bank.kernel_h));
  out.u32(static_cast<std::uint32_t>(bank.kernel_w));
  out.u32(static_cast<std::uint32_t>(bank.stride));
  for (float w : bank.weights) out.f32(w);
  for (float b : bank.biases) out.f32(b);
  detail::write_file_bytes(path, out.bytes());
}

FilterBank random_filter_bank(std::size_t num_filters, std::size_t kernel, std::size_t stride, std::uint64_t seed) {
  FilterBank bank{num_filters, 3, kernel, kernel, stride, {}, {}};
  std::mt19937_64 rng(seed);
  const double sd = 1.0 / static_cast<double>(kernel);
  bank.weights.resize(num_filters * 3 * kernel * kernel);
  for (auto& w : bank.weights) w = static_cast<float>(sd * standard_normal(rng));
  bank.biases.resize(num_filters);
  for (auto& b : bank.biases) b = static_cast<float>(0.01 * standard_normal(rng));
  return bank;
}

PooledMaps convolve_pool(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid) {
  if (bank.channels != 3) {
    throw Error(ErrorCode::DimensionMismatch, "filter bank has " + std::to_string(bank.channels) + " channels, need 3");
  }
  if (img.width < bank.kernel_w || img.height < bank.kernel_h) {
    throw Error(ErrorCode::ImageTooSmall, "image smaller than the filter kernel");
  }
  if (pool_grid == 0) throw Error(ErrorCode::InvalidArgument, "pool grid must be positive");

  const std::size_t out_w = (img.width - bank.kernel_w) / bank.stride + 1;
  const std::size_t out_h = (img.height - bank.kernel_h) / bank.stride + 1;
  const std::size_t patch = bank.channels * bank.kernel_h * bank.kernel_w;
  const std::size_t positions = out_w * out_h;

  // im2col: one column per output position, rows ordered like the weights.
  Eigen::MatrixXd cols(patch, positions);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      double* col = cols.col(static_cast<Eigen::Index>(oy * out_w + ox)).data();
      for (std::size_t c = 0; c < bank.channels; ++c)
        for (std::size_t ky = 0; ky < bank.kernel_h; ++ky) {
          const std::size_t y = oy * bank.stride + ky;
          for (std::size_t kx = 0; kx < bank.kernel_w; ++kx)
            *col++ = img.at(ox * bank.stride + kx, y)[c];
        }
    }
  }
  const Eigen::MatrixXd weights =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          bank.weights.data(), static_cast<Eigen::Index>(bank.num_filters), static_cast<Eigen::Index>(patch))
          .cast<double>();
  Eigen::MatrixXd response = weights * cols;

  const auto yb = tile_bounds(out_h, pool_grid);
  const auto xb = tile_bounds(out_w, pool_grid);
  PooledMaps maps{bank.num_filters, yb.size() - 1, xb.size() - 1, {}};
  maps.values.assign(maps.num_maps * maps.pool_h * maps.pool_w, 0.0);
  for (std::size_t f = 0; f < bank.num_filters; ++f) {
    const double bias = bank.biases[f];
    for (std::size_t ty = 0; ty < maps.pool_h; ++ty) {
      for (std::size_t tx = 0; tx < maps.pool_w; ++tx) {
        double best = 0.0;  // ReLU floor
        for (std::size_t y = yb[ty]; y < yb[ty + 1]; ++y)
          for (std::size_t x = xb[tx]; x < xb[tx + 1]; ++x)
            best = std::max(best, response(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(y * out_w + x)) + bias);
        maps.values[(f * maps.pool_h + ty) * maps.pool_w + tx] = best;
      }
    }
  }
  return maps;
}

PooledMaps pooled_responses(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid) {
  return convolve_pool(resize_bilinear(img, kCnnInputSize, kCnnInputSize), bank, pool_grid);
}

double symmetry_from_maps(const PooledMaps& original, const PooledMaps& flipped) {
  if (original.values.size() != flipped.values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pooled maps differ in shape");
  }
  double diff = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < original.values.size(); ++i) {
    diff += std::fabs(original.values[i] - flipped.values[i]);
    sa += std::fabs(original.values[i]);
    sb += std::fabs(flipped.values[i]);
  }
  const double denom = sa + sb;
  if (denom == 0.0) return 1.0;
  return std::clamp(1.0 - diff / denom, 0.0, 1.0);
}

double symmetry(const RgbImage& img, const FilterBank& bank, Axis axis, std::size_t pool_grid) {
  const auto sized = resize_bilinear(img, kCnnInputSize, kCnnInputSize);
  const auto flipped = axis == Axis::LeftRight ? flip_horizontal(sized) : flip_vertical(sized);
  return symmetry_from_maps(convolve_pool(sized, bank, pool_grid), convolve_pool(flipped, bank, pool_grid));
}

double sparseness(const PooledMaps& maps) {
  if (maps.num_maps == 0) return 0.0;
  const std::size_t per_map = maps.pool_h * maps.pool_w;
  std::vector<double> vars(maps.num_maps);
  for (std::size_t m = 0; m < maps.num_maps; ++m) vars[m] = population_variance(maps.values.data() + m * per_map, per_map);
  std::sort(vars.begin(), vars.end());
  const std::size_t mid = vars.size() / 2;
  return vars.size() % 2 ? vars[mid] : 0.5 * (vars[mid - 1] + vars[mid]);
}

double variability(const PooledMaps& maps) { return population_variance(maps.values.data(), maps.values.size()); }

CnnFilterSips cnn_filter_sips(const RgbImage& img, const FilterBank& bank, std::size_t pool_grid) {
  const auto sized = resize_bilinear(img, kCnnInputSize, kCnnInputSize);
  const auto base = convolve_pool(sized, bank, pool_grid);
  const auto lr = convolve_pool(flip_horizontal(sized), bank, pool_grid);
  const auto ud = convolve_pool(flip_vertical(sized), bank, pool_grid);
  return {symmetry_from_maps(base, lr), symmetry_from_maps(base, ud), sparseness(base), variability(base)};
}

}  // namespace sipkit
