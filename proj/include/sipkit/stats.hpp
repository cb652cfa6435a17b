#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sipkit {

// ---------------------------------------------------------------- Spearman

struct SpearmanResult {
  double rho = 0.0;
  double p = 1.0;
  bool constant_input = false;
};

/// 1-based ranks, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> v);

/// Two-sided p-value of a correlation r on n samples via Student-t(n-2).
double correlation_p_value(double r, std::size_t n);

// Pearson correlation of tie-averaged ranks with a t-approximation p-value.
// Throws LengthMismatch for unequal lengths and InvalidArgument for n < 3.
// Zero rank variance yields rho = 0, p = 1 with constant_input set.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

// --------------------------------------------------------------------- OLS

struct OlsFit {
  std::size_t n = 0;
  std::size_t p = 0;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;        // raw weights, one per column
  Eigen::VectorXd standardized_betas;  // from the z-scored refit
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;            // two-sided t-test per coefficient
  double r2 = 0.0;
  double r2_adjusted = 0.0;
};

// Least squares with intercept. Requires n > p + 1; throws SingularDesign
// when the design is rank deficient at relative tolerance 1e-10.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// 1 - (1 - r2)(n - 1)/(n - p - 1).
double adjusted_r2(double r2, std::size_t n, std::size_t p);

// ------------------------------------------------------- Cross-validation

struct CvScheme {
  std::size_t repetitions = 100;
  std::size_t folds = 2;
  std::uint64_t seed = 0;
};

/// Row split of one repetition: the two halves of a seeded permutation.
struct CvSplit {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

// Splits depend only on (seed, repetition index, n), so every predictor
// subset scored under one scheme sees the same halves.
std::vector<CvSplit> make_cv_splits(std::size_t n, const CvScheme& scheme);

// Scores predictor subsets by repeated 2-fold cross-validated adjusted R².
// Each repetition fits on one half and evaluates on the other, in both
// directions; the holdout R² is adjusted with the holdout n and the subset
// size and the 2 * repetitions values are averaged. Folds whose training
// design is singular contribute the intercept-only score.
class CvEvaluator {
 public:
  CvEvaluator(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme);

  double score(std::span<const std::size_t> predictors) const;
  double baseline() const;  // intercept-only model

  std::size_t columns() const { return static_cast<std::size_t>(z_.cols()); }
  std::size_t rows() const { return static_cast<std::size_t>(z_.rows()); }
  std::size_t min_holdout() const { return min_holdout_; }

  /// Number of singular folds seen by the most recent score() call.
  std::size_t last_singular_folds() const { return last_singular_; }

 private:
  struct HalfStats {
    std::size_t n = 0;
    Eigen::MatrixXd gram;  // X^T X
    Eigen::VectorXd sx;    // column sums
    Eigen::VectorXd xy;    // X^T y
    double sy = 0.0;
    double yy = 0.0;
  };
  double fold_score(const HalfStats& train, const HalfStats& hold, std::span<const std::size_t> predictors,
                    bool& singular) const;

  Eigen::MatrixXd z_;
  Eigen::VectorXd y_;
  std::vector<std::pair<HalfStats, HalfStats>> halves_;
  std::size_t min_holdout_ = 0;
  mutable std::size_t last_singular_ = 0;
};

double cv_adjusted_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme,
                      std::span<const std::size_t> predictors);

struct RegressionModel {
  std::vector<std::size_t> selected;           // column indices, selection order
  std::vector<std::string> selected_names;
  std::vector<double> step_scores;             // CV score after each accepted step
  double baseline_cv = 0.0;                    // intercept-only CV score
  double r2_adjusted_cv = 0.0;
  std::optional<OlsFit> fit;                   // refit on all rows; empty model has none
  std::size_t n = 0;
  bool empty() const { return selected.empty(); }
};

// Greedy forward selection on CV adjusted R². A candidate is added only if it
// strictly improves the current score; equal scores go to the lower column
// index. The final set is refit on all rows for standardized betas.
RegressionModel forward_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme,
                               const std::vector<std::string>& names = {});

// ------------------------------------------------------ Correlation maps

struct CorrelationMap {
  std::vector<std::string> rows;  // SIP names
  std::vector<std::string> cols;  // dataset / rating ids
  Eigen::MatrixXd rho;            // NaN marks a missing entry
  Eigen::MatrixXd p_values;
};

struct DistanceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd distance;
  std::size_t missing_treated_as_zero = 0;
};

/// Euclidean distance between the rho columns; missing entries count as 0.
DistanceMatrix pattern_distance(const CorrelationMap& map);

// --------------------------------------------------------------------- SVM

struct SvmOptions {
  double c = 1.0;
  std::optional<double> gamma;  // default 1 / (p * var(X))
  double tolerance = 1e-3;
  std::size_t max_iterations = 1'000'000;
};

struct BinarySvm {
  int positive_label = 0;
  std::vector<std::size_t> support;  // indices into the training rows
  Eigen::VectorXd alpha;             // one per training row, in [0, C]
  Eigen::VectorXd dual_coef;         // alpha_i * y_i for support rows
  double bias = 0.0;                 // decision = sum dual_coef K(sv, x) + bias
};

struct SvmModel {
  std::vector<int> classes;
  std::vector<BinarySvm> machines;  // one-vs-rest, parallel to classes
  Eigen::MatrixXd support_vectors;  // training rows referenced by machines
  double gamma = 1.0;
  double c = 1.0;
};

double default_gamma(const Eigen::MatrixXd& x);

// One-vs-rest RBF SVMs solved by SMO. The caller standardizes features.
// Throws DegenerateLabels with fewer than two classes, InvalidArgument when
// a class has fewer than two samples.
SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, const SvmOptions& opts = {});

Eigen::MatrixXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x);
std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& x);

struct ClassifierSelection {
  std::vector<std::size_t> selected;
  std::vector<std::string> selected_names;
  std::vector<double> step_scores;
  double baseline_accuracy = 0.0;  // majority class of the training half
  double cv_accuracy = 0.0;
};

/// Mean holdout accuracy over the repeated 2-fold splits of `scheme`.
double cv_accuracy(const Eigen::MatrixXd& x, const std::vector<int>& labels, const CvScheme& scheme,
                   std::span<const std::size_t> predictors, const SvmOptions& opts = {});

// Forward selection with the SVM and CV accuracy in place of OLS and
// adjusted R². Columns are standardized on each training half.
ClassifierSelection forward_select_classifier(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                              const CvScheme& scheme, const std::vector<std::string>& names = {},
                                              const SvmOptions& opts = {}, std::size_t max_features = 20);

// ----------------------------------------------------------------- helpers

/// z-scores columns with the population sd; constant columns become 0.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

}  // namespace sipkit
