#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sipkit/error.hpp"
#include "sipkit/sip_cnnfilter.hpp"

using namespace sipkit;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sipkit_test_cnn";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

ErrorCode load_error(const std::filesystem::path& p) {
  try {
    load_filter_bank(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "load succeeded";
  return ErrorCode::RunFailed;
}

RgbImage noise_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  RgbImage img(w, h);
  for (auto& px : img.pixels) px = {u(rng), u(rng), u(rng)};
  return img;
}

FilterBank single_filter(std::size_t k, std::size_t stride) {
  FilterBank b{1, 3, k, k, stride, std::vector<float>(3 * k * k, 0.0f), {0.0f}};
  return b;
}

double flat_variance(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

PooledMaps maps_from(std::size_t n, std::size_t h, std::size_t w, std::vector<double> values) {
  return PooledMaps{n, h, w, std::move(values)};
}

}  // namespace

TEST(FilterBankIo, RoundTripAlexNetShape) {
  const auto bank = random_filter_bank(96, 11, 4, 21);
  const auto path = temp_path("bank96.filb");
  save_filter_bank(bank, path);
  const auto back = load_filter_bank(path);
  EXPECT_EQ(back.num_filters, 96u);
  EXPECT_EQ(back.channels, 3u);
  EXPECT_EQ(back.kernel_h, 11u);
  EXPECT_EQ(back.kernel_w, 11u);
  EXPECT_EQ(back.stride, 4u);
  EXPECT_EQ(back.weights, bank.weights);
  EXPECT_EQ(back.biases, bank.biases);
}

TEST(FilterBankIo, WrongMagic) {
  const auto path = temp_path("magic.filb");
  save_filter_bank(random_filter_bank(2, 3, 1, 1), path);
  auto bytes = read_bytes(path);
  bytes[0] = 'X';
  write_bytes(path, bytes);
  EXPECT_EQ(load_error(path), ErrorCode::FormatError);
}

TEST(FilterBankIo, WrongVersion) {
  const auto path = temp_path("version.filb");
  save_filter_bank(random_filter_bank(2, 3, 1, 1), path);
  auto bytes = read_bytes(path);
  bytes[4] = 7;
  write_bytes(path, bytes);
  EXPECT_EQ(load_error(path), ErrorCode::FormatError);
}

TEST(FilterBankIo, MissingFilterIsTruncated) {
  const auto bank = random_filter_bank(96, 11, 4, 2);
  auto short_bank = bank;
  short_bank.num_filters = 95;
  short_bank.weights.resize(95 * 3 * 11 * 11);
  short_bank.biases.resize(95);
  const auto path = temp_path("short.filb");
  save_filter_bank(short_bank, path);
  auto bytes = read_bytes(path);
  // Patch the filter count in the header back to 96.
  const std::uint32_t n = 96;
  std::memcpy(bytes.data() + 8, &n, 4);
  write_bytes(path, bytes);
  EXPECT_EQ(load_error(path), ErrorCode::TruncatedFile);
}

TEST(FilterBankIo, TrailingBytesAndNonFinite) {
  const auto path = temp_path("trailing.filb");
  save_filter_bank(random_filter_bank(2, 3, 1, 1), path);
  write_bytes(path, read_bytes(path) + "xx");
  EXPECT_EQ(load_error(path), ErrorCode::DimensionMismatch);

  auto bank = random_filter_bank(2, 3, 1, 1);
  bank.weights[5] = std::nanf("");
  save_filter_bank(bank, path);
  EXPECT_EQ(load_error(path), ErrorCode::NonFiniteData);
}

TEST(FilterBankIo, MissingFile) { EXPECT_EQ(load_error(temp_path("nope.filb")), ErrorCode::IoError); }

TEST(ConvolvePool, ZeroImageZeroBias) {
  auto bank = random_filter_bank(4, 5, 2, 3);
  for (auto& b : bank.biases) b = 0.0f;
  const auto maps = convolve_pool(RgbImage(40, 40), bank);
  for (double v : maps.values) EXPECT_EQ(v, 0.0);
}

TEST(ConvolvePool, CenterTapIdentity) {
  auto bank = single_filter(3, 1);
  bank.weights[0 * 9 + 4] = 1.0f;  // channel 0, center
  const double v = 0.37;
  const auto maps = convolve_pool(RgbImage(30, 20, {v, 0.9, 0.1}), bank, 4);
  EXPECT_EQ(maps.pool_h, 4u);
  EXPECT_EQ(maps.pool_w, 4u);
  for (double m : maps.values) EXPECT_NEAR(m, v, 1e-12);
}

TEST(ConvolvePool, OnesKernelOnKnownImage) {
  RgbImage img(4, 4);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) img.at(x, y) = {static_cast<double>(y * 4 + x), 0.0, 0.0};
  auto bank = single_filter(2, 1);
  for (std::size_t i = 0; i < 4; ++i) bank.weights[i] = 1.0f;
  // Hand-unrolled 3x3 valid map: out(x,y) = a(x,y)+a(x+1,y)+a(x,y+1)+a(x+1,y+1).
  const double expected[9] = {10, 14, 18, 26, 30, 34, 42, 46, 50};
  const auto maps = convolve_pool(img, bank, 3);
  ASSERT_EQ(maps.pool_h, 3u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(maps.values[i], expected[i]);

  std::size_t ph = 0, pw = 0;
  const auto ref = oracle::naive_conv_pool(img, bank, 3, ph, pw);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_DOUBLE_EQ(maps.values[i], ref[i]);
}

TEST(ConvolvePool, MatchesNestedLoopOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto bank = random_filter_bank(5, 5 + seed % 3, 1 + seed % 3, seed);
    const auto img = noise_image(31 + seed * 7, 29 + seed * 3, seed + 100);
    for (std::size_t grid : {1u, 4u, 12u, 100u}) {
      const auto maps = convolve_pool(img, bank, grid);
      std::size_t ph = 0, pw = 0;
      const auto ref = oracle::naive_conv_pool(img, bank, grid, ph, pw);
      ASSERT_EQ(maps.pool_h, ph);
      ASSERT_EQ(maps.pool_w, pw);
      ASSERT_EQ(maps.values.size(), ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(maps.values[i], ref[i], 1e-9);
    }
  }
}

TEST(ConvolvePool, Errors) {
  auto bank = random_filter_bank(2, 5, 1, 1);
  EXPECT_THROW(convolve_pool(RgbImage(4, 10), bank), Error);
  bank.channels = 1;
  try {
    convolve_pool(RgbImage(10, 10), bank);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Symmetry, MirrorSymmetricImage) {
  const auto bank = random_filter_bank(8, 11, 4, 5);
  auto img = noise_image(227, 227, 6);
  for (std::size_t y = 0; y < 227; ++y)
    for (std::size_t x = 0; x < 113; ++x) img.at(226 - x, y) = img.at(x, y);
  EXPECT_NEAR(symmetry(img, bank, Axis::LeftRight), 1.0, 1e-6);
}

TEST(Symmetry, ConstantImage) {
  const auto bank = random_filter_bank(8, 11, 4, 5);
  const RgbImage img(100, 80, {0.3, 0.6, 0.2});
  EXPECT_NEAR(symmetry(img, bank, Axis::LeftRight), 1.0, 1e-12);
  EXPECT_NEAR(symmetry(img, bank, Axis::UpDown), 1.0, 1e-12);
}

TEST(Symmetry, SymmetricGradientBeatsNoise) {
  const auto bank = random_filter_bank(8, 11, 4, 5);
  RgbImage grad(200, 200);
  for (std::size_t y = 0; y < 200; ++y)
    for (std::size_t x = 0; x < 200; ++x) {
      const double d = std::fabs(static_cast<double>(x) - 99.5) / 100.0;
      grad.at(x, y) = {d, 1.0 - d, y / 200.0};
    }
  const auto noise = noise_image(200, 200, 77);
  EXPECT_GT(symmetry(grad, bank, Axis::LeftRight), symmetry(noise, bank, Axis::LeftRight));
}

TEST(Symmetry, BothSumsZero) {
  const auto zero = maps_from(1, 2, 2, {0, 0, 0, 0});
  EXPECT_EQ(symmetry_from_maps(zero, zero), 1.0);
  EXPECT_NEAR(symmetry_from_maps(maps_from(1, 1, 2, {1, 0}), maps_from(1, 1, 2, {0, 1})), 0.0, 1e-15);
}

TEST(Sparseness, ConstantMapsAreZero) { EXPECT_EQ(sparseness(maps_from(3, 2, 2, std::vector<double>(12, 4.0))), 0.0); }

TEST(Sparseness, MedianOfOddCount) {
  // Two-entry maps {m - s, m + s} have variance s^2.
  const double s0 = 0, s1 = std::sqrt(2.0), s2 = std::sqrt(10.0);
  const auto maps = maps_from(3, 1, 2, {5 - s0, 5 + s0, 1 - s1, 1 + s1, 9 - s2, 9 + s2});
  EXPECT_NEAR(sparseness(maps), 2.0, 1e-12);
}

TEST(Sparseness, MedianOfEvenCount) {
  std::vector<double> v;
  for (double var : {1.0, 3.0, 5.0, 7.0}) {
    v.push_back(-std::sqrt(var));
    v.push_back(std::sqrt(var));
  }
  EXPECT_NEAR(sparseness(maps_from(4, 1, 2, v)), 4.0, 1e-12);
}

TEST(Variability, Basics) {
  EXPECT_EQ(variability(maps_from(2, 1, 2, {3, 3, 3, 3})), 0.0);
  EXPECT_NEAR(variability(maps_from(2, 1, 2, {0, 0, 2, 2})), 1.0, 1e-15);
}

TEST(Variability, MatchesFlatVarianceOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 5);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> v(8 * 12 * 12);
    for (auto& x : v) x = u(rng);
    EXPECT_NEAR(variability(maps_from(8, 12, 12, v)), flat_variance(v), 1e-9);
  }
}

TEST(CnnFilterSips, AgreesWithSeparateCalls) {
  const auto bank = random_filter_bank(8, 11, 4, 12);
  const auto img = noise_image(150, 120, 4);
  const auto s = cnn_filter_sips(img, bank);
  EXPECT_DOUBLE_EQ(s.symmetry_lr, symmetry(img, bank, Axis::LeftRight));
  EXPECT_DOUBLE_EQ(s.symmetry_ud, symmetry(img, bank, Axis::UpDown));
  const auto maps = pooled_responses(img, bank);
  EXPECT_EQ(maps.pool_h, 12u);
  EXPECT_DOUBLE_EQ(s.sparseness, sparseness(maps));
  EXPECT_DOUBLE_EQ(s.variability, variability(maps));
}
