// Property checks that hold for every input, run over seeded random cases.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sipkit/activations.hpp"
#include "sipkit/image.hpp"
#include "sipkit/sip_basic.hpp"
#include "sipkit/sip_cnnfilter.hpp"
#include "sipkit/sip_structure.hpp"
#include "sipkit/stats.hpp"

using namespace sipkit;

namespace {

RgbImage noise_rgb(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  RgbImage img(w, h);
  for (auto& px : img.pixels) px = {u(rng), u(rng), u(rng)};
  return img;
}

GrayImage smooth_gray(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  const double a = u(rng), b = u(rng), c = u(rng);
  GrayImage g(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      g.at(x, y) = 0.5 + 0.2 * std::sin(0.3 * a * x + 0.2 * b * y) + 0.1 * std::cos(0.1 * c * x * y / 8.0) + 0.05 * u(rng);
  return g;
}

GrayImage rotate90(const GrayImage& g) {
  GrayImage r(g.height, g.width);
  for (std::size_t y = 0; y < g.height; ++y)
    for (std::size_t x = 0; x < g.width; ++x) r.at(g.height - 1 - y, x) = g.at(x, y);
  return r;
}

GrayImage transpose(const GrayImage& g) {
  GrayImage t(g.height, g.width);
  for (std::size_t y = 0; y < g.height; ++y)
    for (std::size_t x = 0; x < g.width; ++x) t.at(y, x) = g.at(x, y);
  return t;
}

template <class Img>
Img shuffled(Img img, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(img.pixels.begin(), img.pixels.end(), rng);
  return img;
}

Eigen::MatrixXd gaussian(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST(SipBasicProperties, EntropiesBoundedAndPermutationInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto img = noise_rgb(40, 30, seed);
    const auto perm = shuffled(img, seed + 99);
    const auto a = color_sips(rgb_to_hsv(img), rgb_to_lab(img));
    const auto b = color_sips(rgb_to_hsv(perm), rgb_to_lab(perm));
    EXPECT_GE(a.color_entropy, 0.0);
    EXPECT_LE(a.color_entropy, 8.0);
    EXPECT_NEAR(a.color_entropy, b.color_entropy, 1e-12);
    const auto la = rgb_to_lab(img), lb = rgb_to_lab(perm);
    EXPECT_NEAR(luminance_entropy(la), luminance_entropy(lb), 1e-12);
    EXPECT_LE(luminance_entropy(la), 8.0);
    EXPECT_NEAR(contrast_rms(la), contrast_rms(lb), 1e-9);
    EXPECT_GT(contrast_rms(la), 0.0);
  }
}

TEST(SipBasicProperties, AspectRatioTimesHeight) {
  for (std::size_t w : {1u, 7u, 640u, 1920u})
    for (std::size_t h : {1u, 3u, 480u, 1200u}) {
      const auto g = geometry_sips(w, h);
      EXPECT_NEAR(g.aspect_ratio * static_cast<double>(h), static_cast<double>(w), 1e-12);
    }
}

TEST(SipBasicProperties, HueMeanIsRotationEquivariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> hues(25);
    for (auto& h : hues) h = u(rng) * 0.4 + 0.1;
    const double delta = u(rng);
    std::vector<double> rotated(hues.size());
    for (std::size_t i = 0; i < hues.size(); ++i) rotated[i] = std::fmod(hues[i] + delta, 1.0);
    double back = circular_mean_hue(rotated) - delta;
    back -= std::floor(back);
    double diff = std::fabs(back - circular_mean_hue(hues));
    diff = std::min(diff, 1.0 - diff);
    EXPECT_LT(diff, 1e-9);
  }
}

TEST(SipStructureProperties, EdgeEntropyRotationInvariant) {
  EdgeEntropyOptions opts;
  opts.max_pairs = 300000;
  opts.seed = 4;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = smooth_gray(96, 80, seed);
    const double a = edge_orientation_entropy(extract_edges(g, 2000), opts);
    const double b = edge_orientation_entropy(extract_edges(rotate90(g), 2000), opts);
    EXPECT_NEAR(a, b, 0.05);
  }
}

TEST(SipStructureProperties, ComplexityLinearInContrast) {
  const auto g = smooth_gray(64, 64, 1);
  GrayImage doubled = g;
  for (auto& v : doubled.values) v = 2.0 * v - 0.5;
  const double a = phog_sips(build_phog(g)).complexity;
  const double b = phog_sips(build_phog(doubled)).complexity;
  EXPECT_NEAR(b / a, 2.0, 2e-3);
}

TEST(SipStructureProperties, PhogRanges) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = phog_sips(build_phog(smooth_gray(50 + seed * 5, 40 + seed * 3, seed)));
    EXPECT_GE(s.self_similarity, 0.0);
    EXPECT_LE(s.self_similarity, 1.0);
    EXPECT_GE(s.anisotropy, 0.0);
    EXPECT_LE(s.anisotropy, (1.0 / 16.0) * (1.0 - 1.0 / 16.0) + 1e-15);
  }
}

TEST(SipStructureProperties, FourierSlopeTransposeInvariant) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto g = oracle::power_law_image(128, -2.5, seed, false, true);
    EXPECT_NEAR(fourier_sips(g).slope, fourier_sips(transpose(g)).slope, 1e-6);
  }
}

TEST(SipStructureProperties, PerfectPowerLawHasZeroSigma) {
  for (double slope : {-1.5, -3.0}) EXPECT_LT(fourier_sips(oracle::power_law_image(96, slope, 1, true)).sigma, 1e-6);
}

TEST(CnnFilterProperties, SymmetryIsSymmetricAndBounded) {
  const auto bank = random_filter_bank(8, 11, 4, 3);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto img = noise_rgb(120 + seed * 13, 90, seed);
    for (Axis axis : {Axis::LeftRight, Axis::UpDown}) {
      const auto flipped = axis == Axis::LeftRight ? flip_horizontal(img) : flip_vertical(img);
      const double a = symmetry(img, bank, axis), b = symmetry(flipped, bank, axis);
      EXPECT_NEAR(a, b, 1e-9);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(CnnFilterProperties, FilterOrderDoesNotMatter) {
  const auto bank = random_filter_bank(8, 7, 2, 4);
  FilterBank reversed = bank;
  const std::size_t per = 3 * 7 * 7;
  for (std::size_t f = 0; f < 8; ++f) {
    std::copy_n(bank.weights.begin() + static_cast<std::ptrdiff_t>(f * per), per,
                reversed.weights.begin() + static_cast<std::ptrdiff_t>((7 - f) * per));
    reversed.biases[7 - f] = bank.biases[f];
  }
  const auto img = noise_rgb(64, 64, 5);
  const auto a = convolve_pool(img, bank, 6), b = convolve_pool(img, reversed, 6);
  EXPECT_NEAR(sparseness(a), sparseness(b), 1e-12);
  EXPECT_NEAR(variability(a), variability(b), 1e-12);
}

TEST(CnnFilterProperties, SmallInputsMatchNestedLoops) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto bank = random_filter_bank(4, 3 + seed % 3, 1 + seed % 2, seed);
    const auto img = noise_rgb(16 + seed * 2, 32 - seed, seed + 7);
    std::size_t ph = 0, pw = 0;
    const auto ref = oracle::naive_conv_pool(img, bank, 12, ph, pw);
    const auto got = convolve_pool(img, bank, 12);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(got.values[i], ref[i], 1e-5);
  }
}

TEST(PcaProperties, VarianceOrderingAndShiftInvariance) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd x = gaussian(30, 6, rng) * gaussian(6, 6, rng);
    const auto pca = fit_pca(x, 5);
    for (Eigen::Index i = 1; i < pca.explained_variance.size(); ++i)
      EXPECT_LE(pca.explained_variance(i), pca.explained_variance(i - 1));
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const double total = centered.squaredNorm() / (x.rows() - 1);
    EXPECT_LE(pca.explained_variance.sum(), total + 1e-8);

    Eigen::MatrixXd shifted = x;
    shifted.rowwise() += Eigen::RowVectorXd::LinSpaced(6, -3, 8);
    const auto pca2 = fit_pca(shifted, 5);
    EXPECT_LT((project(pca2, shifted) - project(pca, x)).cwiseAbs().maxCoeff(), 1e-8);

    const auto again = fit_pca(x, 5);
    EXPECT_LT((again.components - pca.components).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(StatsProperties, SpearmanMonotoneInvariance) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 30; ++t) {
    std::vector<double> x(40), y(40), fx(40);
    for (std::size_t i = 0; i < 40; ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
      fx[i] = std::exp(3.0 * x[i]) + x[i] * x[i] * x[i];
    }
    EXPECT_NEAR(spearman(x, y).rho, spearman(fx, y).rho, 1e-12);
  }
}

TEST(StatsProperties, OlsAffineRescaling) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = gaussian(30, 3, rng);
    const Eigen::VectorXd y = x.col(0) - 0.5 * x.col(2) + gaussian(30, 1, rng).col(0);
    Eigen::MatrixXd scaled = x;
    scaled.col(1) = scaled.col(1) * 250.0 + Eigen::VectorXd::Constant(30, -7.0);
    const auto a = ols_fit(x, y), b = ols_fit(scaled, y);
    EXPECT_LT((a.standardized_betas - b.standardized_betas).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(b.coefficients(1) * 250.0, a.coefficients(1), 1e-8);
  }
}

TEST(StatsProperties, ForwardSelectDeterministic) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = gaussian(120, 6, rng);
  const Eigen::VectorXd y = x.col(2) + 0.4 * x.col(4) + gaussian(120, 1, rng).col(0);
  const auto a = forward_select(x, y, {30, 2, 3});
  const auto b = forward_select(x, y, {30, 2, 3});
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.step_scores, b.step_scores);
  EXPECT_EQ(a.r2_adjusted_cv, b.r2_adjusted_cv);
}

TEST(StatsProperties, PatternDistanceTriangle) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1, 1);
  CorrelationMap map;
  map.rho.resize(20, 7);
  for (int i = 0; i < 20; ++i) map.rows.push_back("s" + std::to_string(i));
  for (int j = 0; j < 7; ++j) map.cols.push_back("d" + std::to_string(j));
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 7; ++j) map.rho(i, j) = u(rng);
  const auto d = pattern_distance(map).distance;
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) EXPECT_LE(d(a, c), d(a, b) + d(b, c) + 1e-9);
}

TEST(StatsProperties, SvmDuplicatedPointLeavesDecisionUnchanged) {
  std::mt19937_64 rng(11);
  Eigen::MatrixXd x = gaussian(50, 2, rng);
  std::vector<int> labels(50);
  for (Eigen::Index i = 0; i < 50; ++i) labels[i] = x(i, 0) + 0.5 * x(i, 1) > 0 ? 1 : 0;
  SvmOptions opts;
  opts.gamma = 0.5;
  opts.tolerance = 1e-6;
  const auto model = svm_train(x, labels, opts);
  // Duplicate a training row that is not a support vector of the machine.
  Eigen::Index dup = -1;
  for (Eigen::Index i = 0; i < 50 && dup < 0; ++i)
    if (model.machines.front().alpha(i) == 0.0) dup = i;
  ASSERT_GE(dup, 0);
  Eigen::MatrixXd x2(51, 2);
  x2 << x, x.row(dup);
  auto labels2 = labels;
  labels2.push_back(labels[static_cast<std::size_t>(dup)]);
  const auto model2 = svm_train(x2, labels2, opts);

  Eigen::MatrixXd grid(121, 2);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) grid.row(i * 11 + j) << -2.5 + 0.5 * i, -2.5 + 0.5 * j;
  EXPECT_LT((svm_decision(model, grid) - svm_decision(model2, grid)).cwiseAbs().maxCoeff(), 1e-3);
}
