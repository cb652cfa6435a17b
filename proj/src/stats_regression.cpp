#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sipkit/error.hpp"
#include "sipkit/random.hpp"
#include "sipkit/stats.hpp"

namespace sipkit {

namespace {

constexpr double kRankTolerance = 1e-10;

double population_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().mean());
}

}  // namespace

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const Eigen::VectorXd col = x.col(c);
    const double mean = col.mean();
    const double sd = population_sd(col);
    if (sd > 0.0) {
      z.col(c) = (col.array() - mean) / sd;
    } else {
      z.col(c).setZero();
    }
  }
  return z;
}

double adjusted_r2(double r2, std::size_t n, std::size_t p) {
  if (n <= p + 1) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (static_cast<std::size_t>(y.size()) != n) throw Error(ErrorCode::LengthMismatch, "X and y row counts differ");
  if (n <= p + 1) {
    throw Error(ErrorCode::InvalidArgument, "OLS needs n > p + 1 (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }

  Eigen::VectorXd mean_x = x.colwise().mean().transpose();
  Eigen::VectorXd sd_x(static_cast<Eigen::Index>(p));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(p); ++c) {
    sd_x(c) = population_sd(x.col(c));
    if (!(sd_x(c) > 0.0)) {
      throw Error(ErrorCode::SingularDesign, "column " + std::to_string(c) + " is constant");
    }
  }
  const double mean_y = y.mean();
  const double sd_y = population_sd(y);

  // Fit on the z-scored design; the intercept column is orthogonal to the
  // centered predictors, so only Z needs factorizing.
  const Eigen::MatrixXd z = (x.rowwise() - mean_x.transpose()).array().rowwise() / sd_x.transpose().array();
  const Eigen::VectorXd yc = y.array() - mean_y;
  const double y_scale = sd_y > 0.0 ? sd_y : 1.0;
  const Eigen::VectorXd yz = yc / y_scale;

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p + 1));
  design.col(0).setOnes();
  design.rightCols(static_cast<Eigen::Index>(p)) = z;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (static_cast<std::size_t>(qr.rank()) < p + 1) {
    throw Error(ErrorCode::SingularDesign, "design matrix is rank deficient");
  }
  const Eigen::VectorXd coef_z = qr.solve(yz);
  const Eigen::VectorXd beta_z = coef_z.tail(static_cast<Eigen::Index>(p));

  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.standardized_betas = sd_y > 0.0 ? beta_z : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  fit.coefficients = (beta_z.array() * y_scale / sd_x.array()).matrix();
  fit.intercept = mean_y - fit.coefficients.dot(mean_x);

  const Eigen::VectorXd resid = y - ((x * fit.coefficients).array() + fit.intercept).matrix();
  const double ss_res = resid.squaredNorm();
  const double ss_tot = yc.squaredNorm();
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.r2_adjusted = adjusted_r2(fit.r2, n, p);

  const auto dof = static_cast<double>(n - p - 1);
  const double sigma2 = ss_res / dof;
  const Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::MatrixXd gram_inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
  fit.std_errors.resize(static_cast<Eigen::Index>(p));
  fit.p_values.resize(static_cast<Eigen::Index>(p));
  const boost::math::students_t_distribution<double> dist(dof);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double se_raw_scale = std::sqrt(std::max(0.0, sigma2 * gram_inv(j, j)));
    fit.std_errors(j) = se_raw_scale / sd_x(j);
    if (se_raw_scale == 0.0) {
      fit.p_values(j) = fit.coefficients(j) == 0.0 ? 1.0 : 0.0;
      continue;
    }
    const double t = fit.coefficients(j) / fit.std_errors(j);
    fit.p_values(j) = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
  }
  return fit;
}

std::vector<CvSplit> make_cv_splits(std::size_t n, const CvScheme& scheme) {
  if (scheme.folds != 2) throw Error(ErrorCode::InvalidArgument, "only 2-fold cross-validation is supported");
  if (scheme.repetitions == 0) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  std::vector<CvSplit> splits;
  splits.reserve(scheme.repetitions);
  for (std::size_t r = 0; r < scheme.repetitions; ++r) {
    std::mt19937_64 rng(substream_seed(scheme.seed, r));
    auto perm = random_permutation(n, rng);
    const std::size_t half = n / 2;
    CvSplit s;
    s.first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
    s.second.assign(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
    std::sort(s.first.begin(), s.first.end());
    std::sort(s.second.begin(), s.second.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

CvEvaluator::CvEvaluator(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(y.size()) != n) throw Error(ErrorCode::LengthMismatch, "X and y row counts differ");
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 4 rows");

  // Standardizing is affine per column and leaves every OLS-with-intercept
  // R² unchanged; it keeps the Gram updates well conditioned.
  z_ = standardize_columns(x);
  const double sd = population_sd(y);
  y_ = sd > 0.0 ? Eigen::VectorXd((y.array() - y.mean()) / sd) : Eigen::VectorXd(y.array() - y.mean());

  auto stats_of = [&](const std::vector<std::size_t>& rows) {
    HalfStats h;
    h.n = rows.size();
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), z_.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = z_.row(static_cast<Eigen::Index>(rows[i]));
      ys(static_cast<Eigen::Index>(i)) = y_(static_cast<Eigen::Index>(rows[i]));
    }
    h.gram = xs.transpose() * xs;
    h.sx = xs.colwise().sum().transpose();
    h.xy = xs.transpose() * ys;
    h.sy = ys.sum();
    h.yy = ys.squaredNorm();
    return h;
  };

  min_holdout_ = n;
  for (const auto& split : make_cv_splits(n, scheme)) {
    halves_.emplace_back(stats_of(split.first), stats_of(split.second));
    min_holdout_ = std::min({min_holdout_, split.first.size(), split.second.size()});
  }
}

double CvEvaluator::fold_score(const HalfStats& train, const HalfStats& hold, std::span<const std::size_t> predictors,
                               bool& singular) const {
  const auto q = static_cast<Eigen::Index>(predictors.size());
  const auto nt = static_cast<double>(train.n);
  const auto nh = static_cast<double>(hold.n);
  double intercept = train.sy / nt;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  singular = false;

  if (q > 0) {
    Eigen::MatrixXd c(q, q);
    Eigen::VectorXd rhs(q);
    for (Eigen::Index a = 0; a < q; ++a) {
      const auto ia = static_cast<Eigen::Index>(predictors[static_cast<std::size_t>(a)]);
      rhs(a) = train.xy(ia) - train.sx(ia) * train.sy / nt;
      for (Eigen::Index b = 0; b < q; ++b) {
        const auto ib = static_cast<Eigen::Index>(predictors[static_cast<std::size_t>(b)]);
        c(a, b) = train.gram(ia, ib) - train.sx(ia) * train.sx(ib) / nt;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kRankTolerance) || !ldlt.isPositive()) {
      singular = true;
    } else {
      beta = ldlt.solve(rhs);
      for (Eigen::Index a = 0; a < q; ++a) {
        intercept -= beta(a) * train.sx(static_cast<Eigen::Index>(predictors[static_cast<std::size_t>(a)])) / nt;
      }
    }
  }

  // Holdout residual sum of squares expanded over the precomputed moments.
  double ss_res = hold.yy - 2.0 * intercept * hold.sy + nh * intercept * intercept;
  if (!singular) {
    for (Eigen::Index a = 0; a < q; ++a) {
      const auto ia = static_cast<Eigen::Index>(predictors[static_cast<std::size_t>(a)]);
      ss_res += -2.0 * beta(a) * hold.xy(ia) + 2.0 * intercept * beta(a) * hold.sx(ia);
      for (Eigen::Index b = 0; b < q; ++b) {
        const auto ib = static_cast<Eigen::Index>(predictors[static_cast<std::size_t>(b)]);
        ss_res += beta(a) * beta(b) * hold.gram(ia, ib);
      }
    }
  }
  ss_res = std::max(0.0, ss_res);
  const double ss_tot = hold.yy - hold.sy * hold.sy / nh;
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return adjusted_r2(r2, hold.n, singular ? 0 : predictors.size());
}

double CvEvaluator::score(std::span<const std::size_t> predictors) const {
  for (std::size_t j : predictors) {
    if (j >= columns()) throw Error(ErrorCode::InvalidArgument, "predictor index out of range");
  }
  if (predictors.size() + 2 > min_holdout_) {
    throw Error(ErrorCode::InvalidArgument, "too many predictors for the holdout size");
  }
  double total = 0.0;
  std::size_t singular_count = 0;
  for (const auto& [a, b] : halves_) {
    bool singular = false;
    total += fold_score(a, b, predictors, singular);
    singular_count += singular;
    total += fold_score(b, a, predictors, singular);
    singular_count += singular;
  }
  last_singular_ = singular_count;
  return total / static_cast<double>(2 * halves_.size());
}

double CvEvaluator::baseline() const { return score({}); }

double cv_adjusted_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme,
                      std::span<const std::size_t> predictors) {
  return CvEvaluator(x, y, scheme).score(predictors);
}

RegressionModel forward_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvScheme& scheme,
                               const std::vector<std::string>& names) {
  if (x.cols() < 1) throw Error(ErrorCode::InvalidArgument, "forward selection needs at least one predictor");
  if (!names.empty() && names.size() != static_cast<std::size_t>(x.cols())) {
    throw Error(ErrorCode::LengthMismatch, "predictor names do not match column count");
  }
  const CvEvaluator eval(x, y, scheme);
  RegressionModel model;
  model.n = static_cast<std::size_t>(x.rows());
  model.baseline_cv = eval.baseline();
  double current = model.baseline_cv;

  const std::size_t p = eval.columns();
  std::vector<bool> used(p, false);
  std::vector<std::size_t> trial;
  while (model.selected.size() < p && model.selected.size() + 3 <= eval.min_holdout()) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_j = p;
    trial = model.selected;
    trial.push_back(0);
    for (std::size_t j = 0; j < p; ++j) {
      if (used[j]) continue;
      trial.back() = j;
      const double s = eval.score(trial);
      if (s > best) {
        best = s;
        best_j = j;
      }
    }
    if (best_j == p || !(best > current)) break;
    used[best_j] = true;
    model.selected.push_back(best_j);
    model.step_scores.push_back(best);
    current = best;
  }
  model.r2_adjusted_cv = current;

  if (!model.selected.empty()) {
    Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(model.selected.size()));
    for (std::size_t k = 0; k < model.selected.size(); ++k) {
      xs.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(model.selected[k]));
    }
    model.fit = ols_fit(xs, y);
  }
  for (std::size_t j : model.selected) {
    model.selected_names.push_back(names.empty() ? "x" + std::to_string(j) : names[j]);
  }
  return model;
}

}  // namespace sipkit
