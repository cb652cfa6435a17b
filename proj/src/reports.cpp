#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/reports.hpp"

namespace sipkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::vector<std::string>& items, char sep = ';') {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string pad2(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

std::string bool_cell(bool b) { return b ? "true" : "false"; }

}  // namespace

// ---------------------------------------------------------- descriptives

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<BoxStats> report_descriptives(const std::vector<SipTable>& tables) {
  if (tables.empty()) throw Error(ErrorCode::InvalidArgument, "descriptives need at least one table");
  std::array<double, kSipCount> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& t : tables) {
    for (auto s : t.columns()) {
      const auto j = static_cast<std::size_t>(s);
      for (const auto& row : t.rows) {
        lo[j] = std::min(lo[j], row[s]);
        hi[j] = std::max(hi[j], row[s]);
      }
    }
  }

  std::vector<BoxStats> out;
  for (const auto& t : tables) {
    const auto cols = t.columns();
    for (std::size_t j = 0; j < kSipCount; ++j) {
      BoxStats b;
      b.dataset = t.dataset_id;
      b.sip = std::string(kSipNames[j]);
      b.n = t.rows.size();
      const auto s = static_cast<Sip>(j);
      if (std::find(cols.begin(), cols.end(), s) == cols.end() || t.rows.empty()) {
        b.absent = true;
        b.q1 = b.median = b.q3 = b.whisker_lo = b.whisker_hi = kNaN;
        out.push_back(b);
        continue;
      }
      if (!(hi[j] > lo[j])) {
        b.zero_range = true;
        b.q1 = b.median = b.q3 = b.whisker_lo = b.whisker_hi = 0.5;
        out.push_back(b);
        continue;
      }
      std::vector<double> v;
      v.reserve(t.rows.size());
      for (const auto& row : t.rows) v.push_back((row[s] - lo[j]) / (hi[j] - lo[j]));
      std::sort(v.begin(), v.end());
      b.q1 = quantile_sorted(v, 0.25);
      b.median = quantile_sorted(v, 0.5);
      b.q3 = quantile_sorted(v, 0.75);
      const double iqr = b.q3 - b.q1;
      const double fence_lo = b.q1 - 1.5 * iqr, fence_hi = b.q3 + 1.5 * iqr;
      b.whisker_lo = b.q1;
      b.whisker_hi = b.q3;
      for (double x : v) {
        if (x < fence_lo || x > fence_hi) {
          ++b.outliers;
        } else {
          b.whisker_lo = std::min(b.whisker_lo, x);
          b.whisker_hi = std::max(b.whisker_hi, x);
        }
      }
      out.push_back(b);
    }
  }
  return out;
}

std::string descriptives_csv(const std::vector<BoxStats>& stats, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("scaling", "min-max over all datasets per SIP; quartiles type-7; whiskers 1.5 IQR");
  w.row({"dataset", "sip", "n", "q1", "median", "q3", "whisker_lo", "whisker_hi", "outliers", "flag"});
  for (const auto& b : stats) {
    const std::string flag = b.absent ? "absent" : b.zero_range ? "zero_range" : "";
    w.row({b.dataset, b.sip, std::to_string(b.n), format_number(b.q1), format_number(b.median), format_number(b.q3),
           format_number(b.whisker_lo), format_number(b.whisker_hi), b.absent ? "" : std::to_string(b.outliers),
           flag});
  }
  return out.str();
}

// ---------------------------------------------------------- correlations

bool CorrelationReport::significant(std::size_t row, std::size_t col) const {
  const double p = map.p_values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  return std::isfinite(p) && p < kAlpha;
}

CorrelationReport report_correlations(const std::vector<RatingColumn>& columns) {
  CorrelationReport rep;
  const auto nc = static_cast<Eigen::Index>(columns.size());
  for (auto name : kSipNames) rep.map.rows.emplace_back(name);
  rep.map.rho = Eigen::MatrixXd::Constant(kSipCount, nc, kNaN);
  rep.map.p_values = Eigen::MatrixXd::Constant(kSipCount, nc, kNaN);
  rep.n.assign(columns.size(), 0);
  rep.positive.assign(columns.size(), 0);
  rep.negative.assign(columns.size(), 0);

  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    rep.map.cols.push_back(col.label);
    const auto& table = col.run->table;
    const Eigen::VectorXd y = aligned_ratings(*col.run, col.rating);
    rep.n[c] = table.rows.size();
    std::vector<double> yv(y.data(), y.data() + y.size()), xv(table.rows.size());
    for (auto s : table.columns()) {
      for (std::size_t r = 0; r < table.rows.size(); ++r) xv[r] = table.rows[r][s];
      const auto res = spearman(xv, yv);
      const auto j = static_cast<Eigen::Index>(s);
      rep.map.rho(j, static_cast<Eigen::Index>(c)) = res.rho;
      rep.map.p_values(j, static_cast<Eigen::Index>(c)) = res.p;
      if (res.p < kAlpha) ++(res.rho > 0 ? rep.positive[c] : rep.negative[c]);
    }
  }
  rep.distance = pattern_distance(rep.map);
  return rep;
}

std::string correlations_csv(const CorrelationReport& report, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("correlation", "Spearman rho, tie-averaged ranks; p from Student-t(n-2); empty cells are absent SIPs");
  std::vector<std::string> header{"sip"};
  for (const auto& c : report.map.cols) {
    header.push_back(c + ".rho");
    header.push_back(c + ".p");
    header.push_back(c + ".significant");
  }
  w.row(header);
  for (std::size_t r = 0; r < report.map.rows.size(); ++r) {
    std::vector<std::string> cells{report.map.rows[r]};
    for (std::size_t c = 0; c < report.map.cols.size(); ++c) {
      const double rho = report.map.rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      cells.push_back(format_number(rho));
      cells.push_back(format_number(report.map.p_values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
      cells.push_back(std::isfinite(rho) ? bool_cell(report.significant(r, c)) : "");
    }
    w.row(cells);
  }
  const std::pair<const char*, const std::vector<std::size_t>*> counts[] = {
      {"#positive", &report.positive}, {"#negative", &report.negative}, {"#n", &report.n}};
  for (const auto& [label, values] : counts) {
    std::vector<std::string> cells{label};
    for (std::size_t v : *values) cells.insert(cells.end(), {std::to_string(v), "", ""});
    w.row(cells);
  }
  return out.str();
}

std::string distance_csv(const DistanceMatrix& distance, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("distance", "Euclidean over SIP rho patterns");
  w.meta("missing_treated_as_zero", std::to_string(distance.missing_treated_as_zero));
  std::vector<std::string> header{"id"};
  header.insert(header.end(), distance.ids.begin(), distance.ids.end());
  w.row(header);
  for (std::size_t i = 0; i < distance.ids.size(); ++i) {
    std::vector<std::string> cells{distance.ids[i]};
    for (std::size_t j = 0; j < distance.ids.size(); ++j)
      cells.push_back(format_number(distance.distance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    w.row(cells);
  }
  return out.str();
}

// ------------------------------------------------------------ regression

std::string PredictorSource::label() const {
  switch (kind) {
    case Sips:
      return "sips";
    case Layer:
      return "layer:" + std::to_string(layer);
    case SipsPlusLayer:
      return "sips+layer:" + std::to_string(layer);
  }
  return {};
}

PredictorSource parse_source(const std::string& text) {
  auto parse_layer = [&](const std::string& digits) {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6) {
      throw Error(ErrorCode::InvalidArgument, "bad predictor source '" + text + "'");
    }
    return static_cast<std::uint32_t>(std::stoul(digits));
  };
  if (text == "sips") return {};
  if (text.rfind("layer:", 0) == 0) return {PredictorSource::Layer, parse_layer(text.substr(6))};
  if (text.rfind("sips+layer:", 0) == 0) return {PredictorSource::SipsPlusLayer, parse_layer(text.substr(11))};
  throw Error(ErrorCode::InvalidArgument, "bad predictor source '" + text + "' (sips, layer:K or sips+layer:K)");
}

PredictorSet layer_predictors(const SipTable& table, const ActivationMatrix& layer, std::size_t wanted) {
  std::map<std::string, Eigen::Index> rows;
  for (std::size_t i = 0; i < layer.image_ids.size(); ++i) rows[layer.image_ids[i]] = static_cast<Eigen::Index>(i);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(table.image_ids.size()), layer.data.cols());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < table.image_ids.size(); ++i) {
    const auto it = rows.find(table.image_ids[i]);
    if (it == rows.end()) {
      missing.push_back(table.image_ids[i]);
      continue;
    }
    data.row(static_cast<Eigen::Index>(i)) = layer.data.row(it->second);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::AlignmentError, "layer " + std::to_string(layer.layer_id) + " lacks " +
                                               std::to_string(missing.size()) + " image(s), first " + missing.front());
  }
  const std::size_t k =
      pca_components_for(static_cast<std::size_t>(data.rows()), static_cast<std::size_t>(data.cols()), wanted);
  PredictorSet set;
  set.pca_k = k;
  set.x = project(fit_pca(data, k), data);
  for (std::size_t c = 1; c <= k; ++c) set.names.push_back("L" + std::to_string(layer.layer_id) + "_pc" + pad2(c));
  return set;
}

PredictorSet build_predictors(const SipTable& table, const PredictorSource& source, const ActivationMatrix* layer) {
  PredictorSet set;
  if (source.kind != PredictorSource::Sips) {
    if (!layer) throw Error(ErrorCode::MissingActivations, "no activations for layer " + std::to_string(source.layer));
    if (layer->layer_id != source.layer) {
      throw Error(ErrorCode::InvalidArgument, "activations are for layer " + std::to_string(layer->layer_id) +
                                                  ", source wants " + std::to_string(source.layer));
    }
  }
  if (source.kind == PredictorSource::Layer) return layer_predictors(table, *layer);
  set.x = sip_matrix(table, &set.names);
  if (source.kind == PredictorSource::SipsPlusLayer) {
    const auto lp = layer_predictors(table, *layer);
    Eigen::MatrixXd both(set.x.rows(), set.x.cols() + lp.x.cols());
    both << set.x, lp.x;
    set.x = std::move(both);
    set.names.insert(set.names.end(), lp.names.begin(), lp.names.end());
    set.pca_k = lp.pca_k;
  }
  return set;
}

RegressionRow report_regression(const AnalysisRun& run, const std::string& rating, const PredictorSource& source,
                                const ActivationMatrix* layer, const CvScheme& scheme) {
  const Eigen::VectorXd y = aligned_ratings(run, rating);
  const auto set = build_predictors(run.table, source, layer);
  RegressionRow row;
  row.rating = rating;
  row.source = source.label();
  row.pca_k = set.pca_k;
  row.model = forward_select(set.x, y, scheme, set.names);
  return row;
}

std::string regression_summary_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.row({"rating", "source", "n", "pca_k", "n_selected", "r2_adjusted_cv", "baseline_cv", "empty_model",
         "selected"});
  for (const auto& r : rows) {
    w.row({r.rating, r.source, std::to_string(r.model.n), r.pca_k ? std::to_string(r.pca_k) : "",
           std::to_string(r.model.selected.size()), format_number(r.model.r2_adjusted_cv),
           format_number(r.model.baseline_cv), bool_cell(r.model.empty()), join(r.model.selected_names)});
  }
  return out.str();
}

std::string regression_table_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata) {
  std::vector<std::string> ratings, sources;
  for (const auto& r : rows) {
    if (std::find(ratings.begin(), ratings.end(), r.rating) == ratings.end()) ratings.push_back(r.rating);
    if (std::find(sources.begin(), sources.end(), r.source) == sources.end()) sources.push_back(r.source);
  }
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  std::vector<std::string> header{"rating"};
  header.insert(header.end(), sources.begin(), sources.end());
  w.row(header);
  for (const auto& rating : ratings) {
    std::vector<std::string> cells{rating};
    for (const auto& source : sources) {
      std::string cell;
      for (const auto& r : rows)
        if (r.rating == rating && r.source == source) cell = format_number(r.model.r2_adjusted_cv);
      cells.push_back(cell);
    }
    w.row(cells);
  }
  return out.str();
}

std::string regression_betas_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("betas", "refit on all rows; p from the coefficient t-test; non-significant survivors are kept and flagged");
  w.row({"rating", "source", "step", "predictor", "standardized_beta", "coefficient", "p_value", "significant",
         "cv_score_after_step"});
  for (const auto& r : rows) {
    if (!r.model.fit) continue;
    const auto& fit = *r.model.fit;
    for (std::size_t i = 0; i < r.model.selected.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      w.row({r.rating, r.source, std::to_string(i + 1), r.model.selected_names[i],
             format_number(fit.standardized_betas[k]), format_number(fit.coefficients[k]),
             format_number(fit.p_values[k]), bool_cell(fit.p_values[k] < kAlpha),
             format_number(r.model.step_scores[i])});
    }
  }
  return out.str();
}

// ----------------------------------------------------------- layer probe

ProbeReport report_layer_probe(const SipTable& table, const std::vector<ActivationMatrix>& layers,
                               const std::map<std::string, std::string>* labels, const ProbeOptions& opts) {
  std::vector<PredictorSet> sets(layers.size());
  parallel_for(layers.size(), opts.threads, [&](std::size_t i) { sets[i] = layer_predictors(table, layers[i]); });

  const auto cols = table.columns();
  std::vector<std::string> sip_names;
  const Eigen::MatrixXd sips = sip_matrix(table, &sip_names);

  ProbeReport rep;
  rep.cells.resize(cols.size() * layers.size());
  parallel_for(rep.cells.size(), opts.threads, [&](std::size_t t) {
    const std::size_t s = t / layers.size(), l = t % layers.size();
    auto& cell = rep.cells[t];
    cell.sip = sip_names[s];
    cell.layer = layers[l].layer_id;
    cell.pca_k = sets[l].pca_k;
    cell.model = forward_select(sets[l].x, sips.col(static_cast<Eigen::Index>(s)), opts.scheme, sets[l].names);
  });

  if (labels) {
    std::set<std::string> distinct;
    std::vector<std::string> raw;
    for (const auto& id : table.image_ids) {
      const auto it = labels->find(id);
      if (it == labels->end()) throw Error(ErrorCode::AlignmentError, "image " + id + " has no content label");
      raw.push_back(it->second);
      distinct.insert(it->second);
    }
    const std::vector<std::string> classes(distinct.begin(), distinct.end());
    std::vector<int> y;
    for (const auto& r : raw)
      y.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), r) - classes.begin()));

    rep.classification.resize(layers.size() + 1);
    parallel_for(rep.classification.size(), opts.threads, [&](std::size_t i) {
      auto& row = rep.classification[i];
      if (i < layers.size()) {
        row.source = "layer:" + std::to_string(layers[i].layer_id);
        row.selection =
            forward_select_classifier(sets[i].x, y, opts.class_scheme, sets[i].names, {}, opts.max_class_features);
      } else {
        row.source = "sips";
        row.selection = forward_select_classifier(sips, y, opts.class_scheme, sip_names, {}, opts.max_class_features);
      }
    });
  }
  return rep;
}

std::string probe_csv(const ProbeReport& report, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.row({"sip", "layer", "pca_k", "r2_adjusted_cv", "n_selected", "selected"});
  for (const auto& c : report.cells) {
    w.row({c.sip, std::to_string(c.layer), std::to_string(c.pca_k), format_number(c.model.r2_adjusted_cv),
           std::to_string(c.model.selected.size()), join(c.model.selected_names)});
  }
  return out.str();
}

std::string classification_csv(const ProbeReport& report, const Metadata& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("classifier", "one-vs-rest RBF SVM, C=1, gamma=1/(p*var); columns standardized per training half");
  w.row({"source", "cv_accuracy", "baseline_accuracy", "n_selected", "selected"});
  for (const auto& r : report.classification) {
    w.row({r.source, format_number(r.selection.cv_accuracy), format_number(r.selection.baseline_accuracy),
           std::to_string(r.selection.selected.size()), join(r.selection.selected_names)});
  }
  return out.str();
}

std::vector<ActivationMatrix> load_layers(const std::filesystem::path& dir, const std::vector<std::uint32_t>& ids) {
  std::vector<std::string> missing;
  for (auto id : ids)
    if (!std::filesystem::is_regular_file(activation_file(dir, id))) missing.push_back(std::to_string(id));
  if (!missing.empty()) {
    throw Error(ErrorCode::MissingActivations, "no activations in " + dir.string() + " for layer(s) " + join(missing, ','));
  }
  std::vector<ActivationMatrix> out;
  for (auto id : ids) {
    auto m = read_activations(activation_file(dir, id));
    if (m.layer_id != id) {
      throw Error(ErrorCode::FormatError, activation_file(dir, id).string() + " holds layer " +
                                              std::to_string(m.layer_id));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<std::uint32_t> parse_layer_list(const std::string& text) {
  std::set<std::uint32_t> ids;
  std::stringstream ss(text);
  std::string part;
  auto num = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 6) {
      throw Error(ErrorCode::InvalidArgument, "bad layer list '" + text + "'");
    }
    return static_cast<std::uint32_t>(std::stoul(s));
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      ids.insert(num(part));
    } else {
      const auto a = num(part.substr(0, dash)), b = num(part.substr(dash + 1));
      if (a > b) throw Error(ErrorCode::InvalidArgument, "bad layer range '" + part + "'");
      for (auto i = a; i <= b; ++i) ids.insert(i);
    }
  }
  if (ids.empty()) throw Error(ErrorCode::InvalidArgument, "empty layer list");
  return {ids.begin(), ids.end()};
}

std::map<std::string, std::string> read_labels(const std::filesystem::path& path) {
  const auto csv = read_csv(path);
  const std::size_t id = csv.column("image_id"), label = csv.column("label");
  std::map<std::string, std::string> out;
  for (const auto& row : csv.rows) {
    if (!out.emplace(row[id], row[label]).second) {
      throw Error(ErrorCode::SchemaError, path.string() + ": duplicate image_id " + row[id]);
    }
  }
  return out;
}

}  // namespace sipkit
