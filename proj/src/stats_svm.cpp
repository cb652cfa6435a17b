#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "sipkit/error.hpp"
#include "sipkit/stats.hpp"

namespace sipkit {

namespace {

constexpr double kTau = 1e-12;

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + na;
  d2.rowwise() += nb.transpose();
  return (-gamma * d2.array().max(0.0)).exp().matrix();
}

struct SmoResult {
  Eigen::VectorXd alpha;
  double rho = 0.0;
};

// Dual C-SVC solved with maximal-violating-pair / second-order working set
// selection. Q_ij = y_i y_j K_ij.
SmoResult solve_smo(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c, double eps, std::size_t max_iter) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) > 0) {
        if (alpha(t) < c && -grad(t) >= gmax) gmax = -grad(t), i = t;
      } else {
        if (alpha(t) > 0 && grad(t) >= gmax) gmax = grad(t), i = t;
      }
    }
    if (i < 0) break;

    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      double grad_diff = 0.0;
      if (y(t) > 0) {
        if (!(alpha(t) > 0)) continue;
        grad_diff = gmax + grad(t);
        gmax2 = std::max(gmax2, grad(t));
      } else {
        if (!(alpha(t) < c)) continue;
        grad_diff = gmax - grad(t);
        gmax2 = std::max(gmax2, -grad(t));
      }
      if (grad_diff > 0) {
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= obj_min) obj_min = obj, j = t;
      }
    }
    if (j < 0 || gmax + gmax2 < eps) break;

    const double yi = y(i), yj = y(j);
    const double qij = yi * yj * k(i, j);
    const double old_ai = alpha(i), old_aj = alpha(j);
    double ai = old_ai, aj = old_aj;
    if (yi != yj) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) aj = 0, ai = diff;
      } else {
        if (ai < 0) ai = 0, aj = -diff;
      }
      if (diff > 0) {
        if (ai > c) ai = c, aj = c - diff;
      } else {
        if (aj > c) aj = c, ai = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) ai = c, aj = sum - c;
      } else {
        if (aj < 0) aj = 0, ai = sum;
      }
      if (sum > c) {
        if (aj > c) aj = c, ai = sum - c;
      } else {
        if (ai < 0) ai = 0, aj = sum;
      }
    }
    alpha(i) = ai;
    alpha(j) = aj;
    const double dai = ai - old_ai, daj = aj - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += y(t) * (yi * k(i, t) * dai + yj * k(j, t) * daj);
    }
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t nr_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (alpha(t) >= c) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  SmoResult res;
  res.alpha = alpha;
  res.rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);
  return res;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> cols,
                               const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          x(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
  return out;
}

// Standardizes train in place with its own moments and applies them to test.
void standardize_pair(Eigen::MatrixXd& train, Eigen::MatrixXd& test) {
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const double mean = train.col(c).mean();
    const double sd = std::sqrt((train.col(c).array() - mean).square().mean());
    const double scale = sd > 0.0 ? 1.0 / sd : 0.0;
    train.col(c) = (train.col(c).array() - mean) * scale;
    test.col(c) = (test.col(c).array() - mean) * scale;
  }
}

int majority_label(const std::vector<int>& labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  int best = 0;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) best = label, best_count = count;
  }
  return best;
}

double fold_accuracy(const Eigen::MatrixXd& x, const std::vector<int>& labels, std::span<const std::size_t> predictors,
                     const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
                     const SvmOptions& opts) {
  std::vector<int> train_labels, test_labels;
  for (auto r : train_rows) train_labels.push_back(labels[r]);
  for (auto r : test_rows) test_labels.push_back(labels[r]);

  std::vector<int> predicted;
  const std::set<int> distinct(train_labels.begin(), train_labels.end());
  if (predictors.empty() || distinct.size() < 2) {
    predicted.assign(test_rows.size(), majority_label(train_labels));
  } else {
    Eigen::MatrixXd train = select_columns(x, predictors, train_rows);
    Eigen::MatrixXd test = select_columns(x, predictors, test_rows);
    standardize_pair(train, test);
    try {
      predicted = svm_predict(svm_train(train, train_labels, opts), test);
    } catch (const Error&) {
      predicted.assign(test_rows.size(), majority_label(train_labels));
    }
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_labels.size(); ++i) correct += predicted[i] == test_labels[i];
  return test_labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_labels.size());
}

}  // namespace

double default_gamma(const Eigen::MatrixXd& x) {
  const double p = static_cast<double>(std::max<Eigen::Index>(x.cols(), 1));
  if (x.size() == 0) return 1.0 / p;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  return var > 0.0 ? 1.0 / (p * var) : 1.0 / p;
}

SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, const SvmOptions& opts) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature rows and labels differ in count");
  }
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) throw Error(ErrorCode::DegenerateLabels, "SVM training needs at least two classes");
  for (const auto& [label, count] : counts) {
    if (count < 2) throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(label) + " has fewer than 2 samples");
  }
  if (!(opts.c > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");

  SvmModel model;
  model.c = opts.c;
  model.gamma = opts.gamma.value_or(default_gamma(x));
  const Eigen::MatrixXd k = rbf_kernel(x, x, model.gamma);

  std::set<std::size_t> union_support;
  for (const auto& [label, count] : counts) {
    model.classes.push_back(label);
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = labels[static_cast<std::size_t>(i)] == label ? 1.0 : -1.0;
    const auto res = solve_smo(k, y, opts.c, opts.tolerance, opts.max_iterations);
    BinarySvm m;
    m.positive_label = label;
    m.alpha = res.alpha;
    m.bias = -res.rho;
    std::vector<double> coef;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (res.alpha(i) > 0.0) {
        m.support.push_back(static_cast<std::size_t>(i));
        coef.push_back(res.alpha(i) * y(i));
        union_support.insert(static_cast<std::size_t>(i));
      }
    }
    m.dual_coef = Eigen::Map<Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    model.machines.push_back(std::move(m));
  }

  // Compact the stored rows to the union of support vectors.
  std::map<std::size_t, std::size_t> remap;
  model.support_vectors.resize(static_cast<Eigen::Index>(union_support.size()), x.cols());
  for (std::size_t idx : union_support) {
    const std::size_t pos = remap.size();
    remap[idx] = pos;
    model.support_vectors.row(static_cast<Eigen::Index>(pos)) = x.row(static_cast<Eigen::Index>(idx));
  }
  for (auto& m : model.machines) {
    for (auto& s : m.support) s = remap.at(s);
  }
  return model;
}

Eigen::MatrixXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.support_vectors.cols() && model.support_vectors.rows() > 0) {
    throw Error(ErrorCode::DimensionMismatch, "feature count differs from the trained model");
  }
  const Eigen::MatrixXd k = rbf_kernel(model.support_vectors, x, model.gamma);
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.machines.size()));
  for (std::size_t c = 0; c < model.machines.size(); ++c) {
    const auto& m = model.machines[c];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double v = m.bias;
      for (std::size_t s = 0; s < m.support.size(); ++s) {
        v += m.dual_coef(static_cast<Eigen::Index>(s)) * k(static_cast<Eigen::Index>(m.support[s]), r);
      }
      out(r, static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& x) {
  const auto d = svm_decision(model, x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    Eigen::Index best = 0;
    d.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = model.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

double cv_accuracy(const Eigen::MatrixXd& x, const std::vector<int>& labels, const CvScheme& scheme,
                   std::span<const std::size_t> predictors, const SvmOptions& opts) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature rows and labels differ in count");
  }
  const auto splits = make_cv_splits(labels.size(), scheme);
  double total = 0.0;
  for (const auto& s : splits) {
    total += fold_accuracy(x, labels, predictors, s.first, s.second, opts);
    total += fold_accuracy(x, labels, predictors, s.second, s.first, opts);
  }
  return total / static_cast<double>(2 * splits.size());
}

ClassifierSelection forward_select_classifier(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                              const CvScheme& scheme, const std::vector<std::string>& names,
                                              const SvmOptions& opts, std::size_t max_features) {
  if (!names.empty() && names.size() != static_cast<std::size_t>(x.cols())) {
    throw Error(ErrorCode::LengthMismatch, "predictor names do not match column count");
  }
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    throw Error(ErrorCode::DegenerateLabels, "classification needs at least two classes");
  }
  ClassifierSelection out;
  out.baseline_accuracy = cv_accuracy(x, labels, scheme, {}, opts);
  double current = out.baseline_accuracy;
  const auto p = static_cast<std::size_t>(x.cols());
  std::vector<bool> used(p, false);
  while (out.selected.size() < std::min(p, max_features)) {
    double best = -1.0;
    std::size_t best_j = p;
    auto trial = out.selected;
    trial.push_back(0);
    for (std::size_t j = 0; j < p; ++j) {
      if (used[j]) continue;
      trial.back() = j;
      const double s = cv_accuracy(x, labels, scheme, trial, opts);
      if (s > best) best = s, best_j = j;
    }
    if (best_j == p || !(best > current)) break;
    used[best_j] = true;
    out.selected.push_back(best_j);
    out.step_scores.push_back(best);
    current = best;
  }
  out.cv_accuracy = current;
  for (std::size_t j : out.selected) out.selected_names.push_back(names.empty() ? "x" + std::to_string(j) : names[j]);
  return out;
}

}  // namespace sipkit
