#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "sipkit/error.hpp"
#include "sipkit/stats.hpp"

using namespace sipkit;

namespace {

Eigen::MatrixXd gaussian(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  return m;
}

Eigen::VectorXd noise(std::size_t n, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd v(n);
  for (auto& e : v) e = g(rng);
  return v;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

oracle::Matrix rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  oracle::Matrix out;
  for (std::size_t r : rows) {
    std::vector<double> row;
    for (std::size_t c : cols) row.push_back(x(r, c));
    out.push_back(row);
  }
  return out;
}

// Refit every fold from scratch and score the holdout.
double brute_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme,
                const std::vector<std::size_t>& cols) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& split : make_cv_splits(static_cast<std::size_t>(x.rows()), scheme)) {
    for (int dir = 0; dir < 2; ++dir) {
      const auto& train = dir == 0 ? split.first : split.second;
      const auto& hold = dir == 0 ? split.second : split.first;
      std::vector<double> yt;
      for (std::size_t r : train) yt.push_back(y(r));
      const auto coef = oracle::normal_equations(rows_of(x, train, cols), yt);
      double mean = 0.0;
      for (std::size_t r : hold) mean += y(r) / static_cast<double>(hold.size());
      double ss_res = 0.0, ss_tot = 0.0;
      for (std::size_t r : hold) {
        double pred = coef[0];
        for (std::size_t k = 0; k < cols.size(); ++k) pred += coef[k + 1] * x(r, cols[k]);
        ss_res += (y(r) - pred) * (y(r) - pred);
        ss_tot += (y(r) - mean) * (y(r) - mean);
      }
      const double m = static_cast<double>(hold.size());
      const double r2 = 1.0 - ss_res / ss_tot;
      total += 1.0 - (1.0 - r2) * (m - 1) / (m - static_cast<double>(cols.size()) - 1);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  double hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return hit / static_cast<double>(a.size());
}

}  // namespace

// ------------------------------------------------------------ Spearman

TEST(Spearman, Monotone) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{10, 20, 30}).rho, 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{3, 2, 1}).rho, -1.0);
}

TEST(Spearman, RankDifferenceFormula) {
  const std::vector<double> x{1, 2, 3}, y{3, 1, 2};
  // 1 - 6 * sum d^2 / (n (n^2 - 1)) with sum d^2 = 6.
  EXPECT_NEAR(spearman(x, y).rho, 1.0 - 6.0 * 6.0 / (3.0 * 8.0), 1e-15);
}

TEST(Spearman, ConstantInputAndErrors) {
  const auto r = spearman(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4});
  EXPECT_TRUE(r.constant_input);
  EXPECT_EQ(r.rho, 0.0);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_THROW(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
}

TEST(Spearman, AverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(StatsOracleSpearman, RandomInstancesWithTies) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng() % 9;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 6);  // frequent ties
      y[i] = static_cast<double>(rng() % 100) / 7.0;
    }
    const auto rx = oracle::count_ranks(x), ry = oracle::count_ranks(y);
    EXPECT_EQ(average_ranks(x), rx);
    const auto got = spearman(x, y);
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
      EXPECT_TRUE(got.constant_input);
      continue;
    }
    const double rho = oracle::pearson(rx, ry);
    EXPECT_NEAR(got.rho, rho, 1e-8) << trial;
    if (std::fabs(rho) < 1.0 - 1e-12) {
      const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
      EXPECT_NEAR(got.p, oracle::t_two_sided(t, n - 2.0), 1e-8) << trial;
    }
  }
}

// ----------------------------------------------------------------- OLS

TEST(Ols, PerfectLine) {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd y = 2.0 * x.col(0).array() + 1.0;
  const auto fit = ols_fit(x, y);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit.r2_adjusted, 1.0, 1e-12);
  EXPECT_NEAR(fit.standardized_betas(0), 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients(0), 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
}

TEST(Ols, SinglePredictorBetaIsPearson) {
  std::mt19937_64 rng(3);
  const auto x = gaussian(40, 1, rng);
  const Eigen::VectorXd y = 0.5 * x.col(0) + noise(40, 1.0, rng);
  EXPECT_NEAR(ols_fit(x, y).standardized_betas(0), oracle::pearson(to_vec(x.col(0)), to_vec(y)), 1e-10);
}

TEST(Ols, FivePointTwoPredictors) {
  Eigen::MatrixXd x(5, 2);
  x << 1, 2, 2, 1, 3, 5, 4, 3, 5, 4;
  Eigen::VectorXd y(5);
  y << 3.1, 2.9, 7.2, 6.8, 8.1;
  const auto fit = ols_fit(x, y);
  const auto ref = oracle::normal_equations(rows_of(x, {0, 1, 2, 3, 4}, {0, 1}), to_vec(y));
  EXPECT_NEAR(fit.intercept, ref[0], 1e-8);
  EXPECT_NEAR(fit.coefficients(0), ref[1], 1e-8);
  EXPECT_NEAR(fit.coefficients(1), ref[2], 1e-8);
}

TEST(Ols, SingularAndUndersized) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 0, 1);
  try {
    ols_fit(x, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularDesign);
  }
  EXPECT_THROW(ols_fit(Eigen::MatrixXd::Random(3, 2), Eigen::VectorXd::Random(3)), Error);
}

TEST(StatsOracleOls, RandomInstances) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t p = 1 + rng() % 4;
    const std::size_t n = p + 3 + rng() % (10 - p);
    const auto x = gaussian(n, p, rng);
    const Eigen::VectorXd y = x * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p)) + noise(n, 1.0, rng);
    std::vector<std::size_t> all(n), cols(p);
    std::iota(all.begin(), all.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    const auto ref = oracle::normal_equations(rows_of(x, all, cols), to_vec(y));
    const auto fit = ols_fit(x, y);
    EXPECT_NEAR(fit.intercept, ref[0], 1e-8) << trial;
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(fit.coefficients(j), ref[j + 1], 1e-8) << trial;

    double ss_res = 0, ss_tot = 0, my = y.mean();
    for (std::size_t i = 0; i < n; ++i) {
      double pred = ref[0];
      for (std::size_t j = 0; j < p; ++j) pred += ref[j + 1] * x(i, j);
      ss_res += (y(i) - pred) * (y(i) - pred);
      ss_tot += (y(i) - my) * (y(i) - my);
    }
    const double r2 = 1 - ss_res / ss_tot;
    EXPECT_NEAR(fit.r2, r2, 1e-8);
    EXPECT_NEAR(fit.r2_adjusted, 1 - (1 - r2) * (n - 1.0) / (n - p - 1.0), 1e-8);
    const double sy = std::sqrt(ss_tot / n);
    for (std::size_t j = 0; j < p; ++j) {
      const double sx = std::sqrt((x.col(j).array() - x.col(j).mean()).square().sum() / n);
      EXPECT_NEAR(fit.standardized_betas(j), ref[j + 1] * sx / sy, 1e-8);
    }
  }
}

// ------------------------------------------------------ Cross-validation

TEST(CrossValidation, SplitsAreSeededHalves) {
  const CvScheme scheme{10, 2, 77};
  const auto a = make_cv_splits(31, scheme);
  const auto b = make_cv_splits(31, scheme);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].first, b[r].first);
    EXPECT_EQ(a[r].first.size(), 15u);
    EXPECT_EQ(a[r].second.size(), 16u);
    std::set<std::size_t> all(a[r].first.begin(), a[r].first.end());
    all.insert(a[r].second.begin(), a[r].second.end());
    EXPECT_EQ(all.size(), 31u);
  }
  EXPECT_NE(a[0].first, a[1].first);
  EXPECT_NE(make_cv_splits(31, {10, 2, 78})[0].first, a[0].first);
  EXPECT_THROW(make_cv_splits(31, {10, 5, 1}), Error);
}

TEST(CrossValidation, ExactLinearIsOne) {
  std::mt19937_64 rng(5);
  const auto x = gaussian(60, 1, rng);
  const Eigen::VectorXd y = x.col(0);
  EXPECT_NEAR(cv_adjusted_r2(x, y, {}, std::vector<std::size_t>{0}), 1.0, 1e-9);
}

TEST(CrossValidation, IndependentIsNonPositive) {
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto x = gaussian(500, 3, rng);
    const auto y = noise(500, 1.0, rng);
    mean += cv_adjusted_r2(x, y, {100, 2, seed}, std::vector<std::size_t>{0, 1, 2}) / 20.0;
  }
  EXPECT_LE(mean, 0.02);
  EXPECT_LT(mean, 0.0);
}

TEST(CrossValidation, Deterministic) {
  std::mt19937_64 rng(6);
  const auto x = gaussian(80, 3, rng);
  const auto y = noise(80, 1.0, rng);
  const std::vector<std::size_t> cols{0, 2};
  EXPECT_EQ(cv_adjusted_r2(x, y, {50, 2, 9}, cols), cv_adjusted_r2(x, y, {50, 2, 9}, cols));
}

TEST(StatsOracleCrossValidation, MatchesFoldByFoldRefit) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 1 + rng() % 4;
    const std::size_t n = 2 * p + 8 + rng() % 20;
    Eigen::MatrixXd x = gaussian(n, p, rng) * 3.0;
    x.col(0).array() += 10.0;
    const Eigen::VectorXd y = x.col(0) * 0.4 + noise(n, 1.0, rng);
    const CvScheme scheme{20, 2, static_cast<std::uint64_t>(trial)};
    const CvEvaluator eval(x, y, scheme);
    std::vector<std::size_t> cols(p);
    std::iota(cols.begin(), cols.end(), 0);
    EXPECT_NEAR(eval.score(cols), brute_cv(x, y, scheme, cols), 1e-8) << trial;
    EXPECT_NEAR(eval.baseline(), brute_cv(x, y, scheme, {}), 1e-8) << trial;
  }
}

// --------------------------------------------------- Forward selection

// A pure-noise column that happens to correlate with the residual still
// raises the CV score now and then; over 200 seeds of this setup exactly
// {x0} came back 179 times. 14 of 20 is the 1% binomial quantile of that rate.
TEST(ForwardSelect, RecoversSingleStrongPredictor) {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    const auto x = gaussian(500, 5, rng);
    const Eigen::VectorXd y = 3.0 * x.col(0) + noise(500, 0.3, rng);
    const auto model = forward_select(x, y, {100, 2, seed});
    ASSERT_FALSE(model.empty());
    EXPECT_EQ(model.selected.front(), 0u);
    EXPECT_LE(model.selected.size(), 2u);
    if (model.selected.size() > 1) EXPECT_LT(model.step_scores[1] - model.step_scores[0], 1e-3);
    exact += model.selected == std::vector<std::size_t>{0};
  }
  EXPECT_GE(exact, 14);
}

TEST(ForwardSelect, NeverTakesBothDuplicates) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed + 2000);
    Eigen::MatrixXd x = gaussian(200, 4, rng);
    x.col(1) = x.col(0);
    const Eigen::VectorXd y = x.col(0) + 0.5 * x.col(2) + noise(200, 1.0, rng);
    const auto model = forward_select(x, y, {50, 2, seed});
    const auto& s = model.selected;
    const bool has0 = std::find(s.begin(), s.end(), 0u) != s.end();
    const bool has1 = std::find(s.begin(), s.end(), 1u) != s.end();
    EXPECT_TRUE(has0 != has1) << seed;
    EXPECT_TRUE(has0);  // ties go to the lower index
  }
}

TEST(ForwardSelect, NoiseGivesEmptyModel) {
  int empty = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed + 3000);
    const auto x = gaussian(500, 5, rng);
    const auto y = noise(500, 1.0, rng);
    const auto model = forward_select(x, y, {100, 2, seed});
    if (model.empty()) {
      ++empty;
      EXPECT_FALSE(model.fit.has_value());
      EXPECT_EQ(model.r2_adjusted_cv, model.baseline_cv);
    }
  }
  EXPECT_GE(empty, 18);
}

TEST(ForwardSelect, StepScoresIncreaseAndFitMatches) {
  std::mt19937_64 rng(4000);
  const auto x = gaussian(150, 4, rng);
  const Eigen::VectorXd y = x.col(3) + 0.6 * x.col(1) + noise(150, 1.0, rng);
  const auto model = forward_select(x, y, {40, 2, 1}, {"a", "b", "c", "d"});
  ASSERT_GE(model.selected.size(), 2u);
  EXPECT_EQ(model.selected[0], 3u);
  EXPECT_EQ(model.selected[1], 1u);
  EXPECT_EQ(model.selected_names[0], "d");
  double prev = model.baseline_cv;
  for (double s : model.step_scores) {
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_EQ(model.r2_adjusted_cv, model.step_scores.back());
  ASSERT_TRUE(model.fit.has_value());
  EXPECT_EQ(model.fit->p, model.selected.size());
}

TEST(StatsOracleForwardSelect, AgreesWithBestSubsetSearch) {
  int agree = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(trial + 5000);
    const std::size_t p = 3 + rng() % 4;
    const std::size_t n = 60 + rng() % 41;
    const auto x = gaussian(n, p, rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    const std::size_t active = 1 + rng() % 2;
    for (std::size_t k = 0; k < active; ++k) beta(static_cast<Eigen::Index>(rng() % p)) = k == 0 ? 1.0 : 0.7;
    const Eigen::VectorXd y = x * beta + noise(n, 1.0, rng);
    const CvScheme scheme{30, 2, trial};

    const CvEvaluator eval(x, y, scheme);
    double best = eval.baseline();
    std::vector<std::size_t> best_set;
    for (std::uint32_t mask = 1; mask < (1u << p); ++mask) {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < p; ++j)
        if (mask & (1u << j)) cols.push_back(j);
      const double s = brute_cv(x, y, scheme, cols);
      if (s > best) best = s, best_set = cols;
    }
    auto chosen = forward_select(x, y, scheme).selected;
    std::sort(chosen.begin(), chosen.end());
    agree += chosen == best_set;
  }
  EXPECT_GE(agree, 95);
}

// ------------------------------------------------------------ Distance

TEST(PatternDistance, Basics) {
  CorrelationMap map;
  map.rows = {"a", "b", "c"};
  map.cols = {"d1", "d2", "d3"};
  map.rho.resize(3, 3);
  map.rho << 0.1, 0.1, 0.4, 0.5, 0.5, 0.5, -0.2, -0.2, -0.2;
  const auto d = pattern_distance(map);
  EXPECT_EQ(d.distance(0, 1), 0.0);
  EXPECT_NEAR(d.distance(0, 2), 0.3, 1e-15);
  EXPECT_EQ(d.distance(2, 0), d.distance(0, 2));
  EXPECT_EQ(d.ids, map.cols);
}

TEST(PatternDistance, MissingCountsAsZero) {
  CorrelationMap map;
  map.rows = {"a", "b"};
  map.cols = {"d1", "d2"};
  map.rho.resize(2, 2);
  map.rho << 0.3, std::nan(""), 0.4, 0.4;
  const auto d = pattern_distance(map);
  EXPECT_EQ(d.missing_treated_as_zero, 1u);
  EXPECT_NEAR(d.distance(0, 1), 0.3, 1e-15);
}

TEST(StatsOraclePatternDistance, RandomInstances) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t r = 1 + rng() % 20, k = 2 + rng() % 6;
    CorrelationMap map;
    map.rho.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < r; ++i) map.rows.push_back("s" + std::to_string(i));
    for (std::size_t j = 0; j < k; ++j) map.cols.push_back("d" + std::to_string(j));
    for (Eigen::Index i = 0; i < map.rho.rows(); ++i)
      for (Eigen::Index j = 0; j < map.rho.cols(); ++j) map.rho(i, j) = u(rng);
    const auto d = pattern_distance(map);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0;
        for (std::size_t i = 0; i < r; ++i) s += std::pow(map.rho(i, a) - map.rho(i, b), 2);
        EXPECT_NEAR(d.distance(a, b), std::sqrt(s), 1e-8);
      }
  }
}

// ----------------------------------------------------------------- SVM

TEST(Svm, SeparableClusters) {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd x = gaussian(60, 2, rng) * 0.5;
  std::vector<int> labels(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    labels[i] = i < 30 ? 0 : 1;
    x(i, 0) += i < 30 ? -2.0 : 2.0;
  }
  const auto model = svm_train(x, labels);
  EXPECT_EQ(accuracy(svm_predict(model, x), labels), 1.0);
}

TEST(Svm, MemorizesToySet) {
  std::mt19937_64 rng(9);
  const auto x = gaussian(20, 3, rng);
  std::vector<int> labels(20);
  for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<int>(rng() % 2);
  SvmOptions opts;
  opts.c = 100.0;
  EXPECT_GE(accuracy(svm_predict(svm_train(x, labels, opts), x), labels), 0.95);
}

TEST(Svm, ThreeClasses) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd x = gaussian(90, 2, rng) * 0.4;
  std::vector<int> labels(90);
  for (Eigen::Index i = 0; i < 90; ++i) {
    labels[i] = static_cast<int>(i / 30) + 5;
    x(i, 0) += 3.0 * std::cos(2.1 * static_cast<double>(i / 30));
    x(i, 1) += 3.0 * std::sin(2.1 * static_cast<double>(i / 30));
  }
  const auto model = svm_train(x, labels);
  EXPECT_EQ(model.classes, (std::vector<int>{5, 6, 7}));
  EXPECT_GE(accuracy(svm_predict(model, x), labels), 0.97);
}

TEST(Svm, Errors) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 2);
  try {
    svm_train(x, std::vector<int>(6, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
  }
  EXPECT_THROW(svm_train(x, {0, 0, 0, 0, 0, 1}), Error);
}

TEST(Svm, DualConstraintsHold) {
  std::mt19937_64 rng(11);
  const auto x = gaussian(40, 2, rng);
  std::vector<int> labels(40);
  for (Eigen::Index i = 0; i < 40; ++i) labels[i] = x(i, 0) * x(i, 1) > 0 ? 1 : 0;
  SvmOptions opts;
  opts.c = 3.0;
  const auto model = svm_train(x, labels, opts);
  for (const auto& m : model.machines) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.alpha.size(); ++i) {
      EXPECT_GE(m.alpha(i), 0.0);
      EXPECT_LE(m.alpha(i), 3.0 + 1e-12);
      sum += m.alpha(i) * (labels[i] == m.positive_label ? 1.0 : -1.0);
    }
    EXPECT_NEAR(sum, 0.0, 1e-9);
  }
}

TEST(Svm, CvAccuracyOnSeparableData) {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd x = gaussian(80, 3, rng);
  std::vector<int> labels(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    labels[i] = i % 2;
    x(i, 1) += labels[i] ? 3.0 : -3.0;
  }
  const std::vector<std::size_t> informative{1}, junk{0, 2};
  EXPECT_GE(cv_accuracy(x, labels, {5, 2, 1}, informative), 0.95);
  EXPECT_LT(cv_accuracy(x, labels, {5, 2, 1}, junk), 0.8);
  const auto sel = forward_select_classifier(x, labels, {5, 2, 1}, {"a", "b", "c"});
  ASSERT_FALSE(sel.selected.empty());
  EXPECT_EQ(sel.selected.front(), 1u);
  EXPECT_EQ(sel.selected_names.front(), "b");
  EXPECT_GE(sel.cv_accuracy, 0.95);
}

TEST(Standardize, ColumnsHaveZeroMeanUnitSd) {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd x = gaussian(30, 3, rng) * 4.0;
  x.col(2).setConstant(7.0);
  const auto z = standardize_columns(x);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(z.col(j).squaredNorm() / 30), 1.0, 1e-12);
  }
  EXPECT_EQ(z.col(2).cwiseAbs().maxCoeff(), 0.0);
}
