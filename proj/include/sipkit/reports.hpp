#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sipkit/activations.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/stats.hpp"

namespace sipkit {

using Metadata = std::vector<std::pair<std::string, std::string>>;

// ------------------------------------------------------------- run dirs

// Output of `sips compute`: the SIP table of the subsample plus the
// rescaled ratings of the same images, one map per rating name.
struct AnalysisRun {
  SipTable table;
  std::vector<std::string> rating_names;
  std::map<std::string, std::map<std::string, double>> ratings;  // rating -> image_id -> [0,1]
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  std::vector<DroppedImage> dropped;
};

// Writes sips.csv, sip_flags.csv, ratings.csv and run.json.
void write_run(const std::filesystem::path& dir, const AnalysisRun& run, const Metadata& metadata);
AnalysisRun read_run(const std::filesystem::path& dir);

/// Metadata block shared by every report: tool, version, seed and fixed conventions.
Metadata report_metadata(const std::string& report, std::uint64_t seed);

/// Ratings of `name` in table order. Throws AlignmentError when an image has none.
Eigen::VectorXd aligned_ratings(const AnalysisRun& run, const std::string& name);

/// The table's SIP columns (canonical order) as an N x p matrix.
Eigen::MatrixXd sip_matrix(const SipTable& table, std::vector<std::string>* names = nullptr);

// ---------------------------------------------------------- descriptives

struct BoxStats {
  std::string dataset;
  std::string sip;
  std::size_t n = 0;
  bool absent = false;      // geometry SIP of a fixed-resolution dataset
  bool zero_range = false;  // all values equal across datasets; stats set to 0.5
  double q1 = 0, median = 0, q3 = 0;
  double whisker_lo = 0, whisker_hi = 0;
  std::size_t outliers = 0;
};

/// Type-7 (linear interpolation) quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Min-max scales each SIP jointly over all tables, then reports quartiles,
// 1.5 IQR whiskers and outlier counts per table. One block per table.
std::vector<BoxStats> report_descriptives(const std::vector<SipTable>& tables);
std::string descriptives_csv(const std::vector<BoxStats>& stats, const Metadata& metadata);

// ---------------------------------------------------------- correlations

struct RatingColumn {
  std::string label;  // dataset_id or dataset_id:rating when a dataset has several
  const AnalysisRun* run = nullptr;
  std::string rating;
};

struct CorrelationReport {
  CorrelationMap map;  // rows: all 20 SIP names; absent SIPs are NaN
  std::vector<std::size_t> n;
  std::vector<std::size_t> positive;  // significant positive rho per column
  std::vector<std::size_t> negative;
  DistanceMatrix distance;

  bool significant(std::size_t row, std::size_t col) const;
};

inline constexpr double kAlpha = 0.05;

// Spearman rho of every SIP against each rating column. Throws
// AlignmentError when a table image has no rating.
CorrelationReport report_correlations(const std::vector<RatingColumn>& columns);
std::string correlations_csv(const CorrelationReport& report, const Metadata& metadata);
std::string distance_csv(const DistanceMatrix& distance, const Metadata& metadata);

// ------------------------------------------------------------ regression

struct PredictorSource {
  enum Kind { Sips, Layer, SipsPlusLayer } kind = Sips;
  std::uint32_t layer = 0;

  std::string label() const;  // sips | layer:K | sips+layer:K
};

/// Parses sips | layer:K | sips+layer:K. Throws InvalidArgument.
PredictorSource parse_source(const std::string& text);

struct PredictorSet {
  std::vector<std::string> names;
  Eigen::MatrixXd x;       // rows follow the table
  std::size_t pca_k = 0;   // components kept for a layer source
};

// Layer activations projected onto their first PCA components, fit on the
// table's images. Names are L<K>_pc01... Throws AlignmentError for missing ids.
PredictorSet layer_predictors(const SipTable& table, const ActivationMatrix& layer, std::size_t wanted = 20);
PredictorSet build_predictors(const SipTable& table, const PredictorSource& source, const ActivationMatrix* layer);

struct RegressionRow {
  std::string rating;
  std::string source;
  std::size_t pca_k = 0;
  RegressionModel model;
};

RegressionRow report_regression(const AnalysisRun& run, const std::string& rating, const PredictorSource& source,
                                const ActivationMatrix* layer, const CvScheme& scheme);

// Long form: one row per (rating, source) plus the selected predictors.
std::string regression_summary_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata);
// Wide form: ratings down, sources across, mean CV adjusted R² in cells.
std::string regression_table_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata);
// One row per selected predictor: standardized beta, refit p-value, significance.
std::string regression_betas_csv(const std::vector<RegressionRow>& rows, const Metadata& metadata);

// ----------------------------------------------------------- layer probe

struct ProbeCell {
  std::string sip;
  std::uint32_t layer = 0;
  std::size_t pca_k = 0;
  RegressionModel model;
};

struct ClassificationRow {
  std::string source;  // layer:K or sips
  ClassifierSelection selection;
};

struct ProbeReport {
  std::vector<ProbeCell> cells;                  // sip-major, layers ascending
  std::vector<ClassificationRow> classification;  // empty without labels
};

struct ProbeOptions {
  CvScheme scheme{};
  CvScheme class_scheme{10, 2, 0};
  std::size_t max_class_features = 20;
  std::size_t threads = 0;
};

// Regresses every SIP of the table on each layer's PCA components. With
// labels, also runs SVM content classification per layer and on the SIPs.
ProbeReport report_layer_probe(const SipTable& table, const std::vector<ActivationMatrix>& layers,
                               const std::map<std::string, std::string>* labels, const ProbeOptions& opts);
std::string probe_csv(const ProbeReport& report, const Metadata& metadata);
std::string classification_csv(const ProbeReport& report, const Metadata& metadata);

/// Loads the requested layers from a directory. Throws MissingActivations
/// naming every absent layer.
std::vector<ActivationMatrix> load_layers(const std::filesystem::path& dir, const std::vector<std::uint32_t>& ids);

/// Parses "1-3,7" style layer lists.
std::vector<std::uint32_t> parse_layer_list(const std::string& text);

/// image_id,label CSV.
std::map<std::string, std::string> read_labels(const std::filesystem::path& path);

// ------------------------------------------------------------------ svg

std::string correlation_svg(const CorrelationReport& report);
std::string descriptives_svg(const std::vector<BoxStats>& stats);

}  // namespace sipkit
