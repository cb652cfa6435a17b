#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sipkit/activations.hpp"
#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/random.hpp"
#include "sipkit/reports.hpp"
#include "sipkit/sip_cnnfilter.hpp"
#include "sipkit/synth.hpp"

namespace fs = std::filesystem;
using namespace sipkit;

namespace {

void log_line(const std::string& msg) { std::cerr << "sipkit: " << msg << '\n'; }

struct ComputeArgs {
  fs::path manifest, meta, filters, out;
  std::uint64_t seed = 0;
  std::size_t n = 500;
  std::size_t threads = 0;
  SipOptions opts;
};

struct AnalyzeArgs {
  std::vector<fs::path> runs;
  std::vector<std::string> ratings;
  std::vector<std::string> sources{"sips"};
  fs::path activations, labels, out;
  std::string layers = "1-16";
  std::size_t reps = 100, folds = 2, class_reps = 10, class_features = 20, threads = 0;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

struct SynthArgs {
  fs::path model, filters, out;
  std::size_t n = 500;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

FilterBank fallback_bank(std::uint64_t seed) { return random_filter_bank(8, 11, 4, substream_seed(seed, 0xF11Bu)); }

int run_compute(const ComputeArgs& a) {
  const auto manifest = load_manifest(a.manifest, a.meta);
  const auto bank = load_filter_bank(a.filters);
  const auto ids = subsample(manifest, a.n, a.seed);
  log_line("computing SIPs for " + std::to_string(ids.size()) + " of " + std::to_string(manifest.entries.size()) +
           " images in " + manifest.dataset_id);
  auto result = compute_sip_table(manifest, ids, bank, a.seed, a.opts, a.threads, log_line);

  AnalysisRun run;
  run.table = std::move(result.table);
  run.dropped = std::move(result.dropped);
  run.seed = a.seed;
  run.requested = a.n;
  run.rating_names = manifest.rating_names;
  for (const auto& name : manifest.rating_names) run.ratings[name] = rescale_ratings(manifest, name);

  auto meta = report_metadata("sips", a.seed);
  meta.emplace_back("dataset_id", manifest.dataset_id);
  meta.emplace_back("fixed_resolution", run.table.fixed_dims ? "true" : "false");
  meta.emplace_back("filters", std::to_string(bank.num_filters) + "x" + std::to_string(bank.channels) + "x" +
                                   std::to_string(bank.kernel_h) + "x" + std::to_string(bank.kernel_w) + " stride " +
                                   std::to_string(bank.stride));
  meta.emplace_back("display_limit", std::to_string(a.opts.display.max_width) + "x" +
                                         std::to_string(a.opts.display.max_height));
  meta.emplace_back("fourier_fit", format_number(a.opts.fourier.fit_lo) + " cycles/image to " +
                                       format_number(a.opts.fourier.fit_hi_frac) + " Nyquist");
  meta.emplace_back("dropped", std::to_string(run.dropped.size()));
  write_run(a.out, run, meta);
  log_line("wrote " + std::to_string(run.table.rows.size()) + " rows to " + a.out.string());
  return 0;
}

std::vector<AnalysisRun> load_runs(const AnalyzeArgs& a) {
  std::vector<AnalysisRun> runs;
  for (const auto& dir : a.runs) runs.push_back(read_run(dir));
  return runs;
}

std::vector<std::string> ratings_of(const AnalysisRun& run, const AnalyzeArgs& a) {
  if (a.ratings.empty()) return run.rating_names;
  std::vector<std::string> out;
  for (const auto& r : a.ratings)
    if (run.ratings.count(r)) out.push_back(r);
  if (out.empty()) throw Error(ErrorCode::SchemaError, "run " + run.table.dataset_id + " has none of the requested ratings");
  return out;
}

CvScheme scheme_of(const AnalyzeArgs& a, const AnalysisRun& run) {
  if (a.folds != 2) throw Error(ErrorCode::InvalidArgument, "only 2-fold cross-validation is supported");
  if (a.reps < 1) throw Error(ErrorCode::InvalidArgument, "--reps must be at least 1");
  return {a.reps, a.folds, a.seed.value_or(run.seed)};
}

CorrelationReport correlate(const std::vector<AnalysisRun>& runs, const AnalyzeArgs& a) {
  std::vector<RatingColumn> cols;
  for (const auto& run : runs) {
    const auto names = ratings_of(run, a);
    for (const auto& r : names) {
      const bool qualify = names.size() > 1 || runs.size() > 1;
      const std::string label = qualify ? run.table.dataset_id + (names.size() > 1 ? ":" + r : "") : r;
      cols.push_back({label, &run, r});
    }
  }
  return report_correlations(cols);
}

std::uint64_t seed_label(const AnalyzeArgs& a, const std::vector<AnalysisRun>& runs) {
  return a.seed.value_or(runs.front().seed);
}

int run_correlate(const AnalyzeArgs& a, bool with_correlations) {
  const auto runs = load_runs(a);
  const auto rep = correlate(runs, a);
  const auto seed = seed_label(a, runs);
  if (with_correlations) {
    write_text_file(a.out / "correlations.csv", correlations_csv(rep, report_metadata("correlations", seed)));
    if (a.svg) write_text_file(a.out / "correlations.svg", correlation_svg(rep));
    for (std::size_t c = 0; c < rep.map.cols.size(); ++c) {
      log_line(rep.map.cols[c] + ": " + std::to_string(rep.positive[c]) + " positive, " +
               std::to_string(rep.negative[c]) + " negative significant SIPs");
    }
  }
  write_text_file(a.out / "distance.csv", distance_csv(rep.distance, report_metadata("distance", seed)));
  return 0;
}

int run_describe(const AnalyzeArgs& a) {
  const auto runs = load_runs(a);
  std::vector<SipTable> tables;
  for (const auto& r : runs) tables.push_back(r.table);
  const auto stats = report_descriptives(tables);
  write_text_file(a.out / "descriptives.csv", descriptives_csv(stats, report_metadata("descriptives", seed_label(a, runs))));
  if (a.svg) write_text_file(a.out / "descriptives.svg", descriptives_svg(stats));
  return 0;
}

int run_regress(const AnalyzeArgs& a) {
  if (a.runs.size() != 1) throw Error(ErrorCode::InvalidArgument, "regress takes exactly one --run");
  const auto run = read_run(a.runs.front());
  const auto scheme = scheme_of(a, run);

  std::vector<PredictorSource> sources;
  std::vector<std::uint32_t> layer_ids;
  for (const auto& s : a.sources) {
    sources.push_back(parse_source(s));
    if (sources.back().kind != PredictorSource::Sips) layer_ids.push_back(sources.back().layer);
  }
  std::map<std::uint32_t, ActivationMatrix> layers;
  if (!layer_ids.empty()) {
    if (a.activations.empty()) throw Error(ErrorCode::MissingActivations, "layer sources need --activations");
    std::sort(layer_ids.begin(), layer_ids.end());
    layer_ids.erase(std::unique(layer_ids.begin(), layer_ids.end()), layer_ids.end());
    for (auto& m : load_layers(a.activations, layer_ids)) layers[m.layer_id] = std::move(m);
  }

  const auto ratings = ratings_of(run, a);
  std::vector<RegressionRow> rows(ratings.size() * sources.size());
  parallel_for(rows.size(), a.threads, [&](std::size_t t) {
    const auto& src = sources[t % sources.size()];
    const ActivationMatrix* layer = src.kind == PredictorSource::Sips ? nullptr : &layers.at(src.layer);
    rows[t] = report_regression(run, ratings[t / sources.size()], src, layer, scheme);
  });
  for (const auto& r : rows) {
    std::string sel;
    for (const auto& n : r.model.selected_names) sel += (sel.empty() ? "" : ",") + n;
    log_line(r.rating + " ~ " + r.source + ": adj R2 (CV) = " + format_number(r.model.r2_adjusted_cv) +
             (r.model.empty() ? " (empty model)" : " [" + sel + "]"));
  }
  auto meta = report_metadata("regression", scheme.seed);
  meta.emplace_back("dataset_id", run.table.dataset_id);
  meta.emplace_back("repetitions", std::to_string(scheme.repetitions));
  write_text_file(a.out / "regression_summary.csv", regression_summary_csv(rows, meta));
  write_text_file(a.out / "regression_table.csv", regression_table_csv(rows, meta));
  write_text_file(a.out / "regression_betas.csv", regression_betas_csv(rows, meta));
  return 0;
}

int run_probe(const AnalyzeArgs& a) {
  if (a.runs.size() != 1) throw Error(ErrorCode::InvalidArgument, "probe takes exactly one --run");
  if (a.activations.empty()) throw Error(ErrorCode::MissingActivations, "probe needs --activations");
  const auto run = read_run(a.runs.front());
  ProbeOptions opts;
  opts.scheme = scheme_of(a, run);
  opts.class_scheme = {a.class_reps, 2, opts.scheme.seed};
  opts.max_class_features = a.class_features;
  opts.threads = a.threads;
  const auto layers = load_layers(a.activations, parse_layer_list(a.layers));
  std::optional<std::map<std::string, std::string>> labels;
  if (!a.labels.empty()) labels = read_labels(a.labels);
  const auto rep = report_layer_probe(run.table, layers, labels ? &*labels : nullptr, opts);

  auto meta = report_metadata("probe", opts.scheme.seed);
  meta.emplace_back("dataset_id", run.table.dataset_id);
  meta.emplace_back("repetitions", std::to_string(opts.scheme.repetitions));
  write_text_file(a.out / "probe.csv", probe_csv(rep, meta));
  if (labels) {
    meta.emplace_back("classification_repetitions", std::to_string(opts.class_scheme.repetitions));
    write_text_file(a.out / "classification.csv", classification_csv(rep, meta));
  }
  return 0;
}

int run_synth(const SynthArgs& a) {
  const auto model = a.model.empty() ? SynthModel{} : load_synth_model(a.model);
  const auto bank = a.filters.empty() ? fallback_bank(a.seed) : load_filter_bank(a.filters);
  const auto res = synth_generate(model, a.n, a.seed, bank, a.out, a.threads);
  log_line("generated " + std::to_string(res.table.rows.size()) + " images; analytic R2 = " +
           format_number(res.analytic_r2));
  return 0;
}

int run_fixtures(const fs::path& out) {
  fs::create_directories(out / "activations");
  save_filter_bank(random_filter_bank(8, 11, 4, 7), out / "mini.filb");
  const std::uint32_t dims[] = {8, 16, 32};
  for (std::uint32_t layer = 1; layer <= 3; ++layer) {
    ActivationMatrix m;
    m.layer_id = layer;
    for (int i = 0; i < 24; ++i) m.image_ids.push_back("fixture_" + std::string(i < 10 ? "0" : "") + std::to_string(i));
    m.data.resize(24, dims[layer - 1]);
    std::mt19937_64 rng(substream_seed(11, layer));
    for (Eigen::Index r = 0; r < m.data.rows(); ++r)
      for (Eigen::Index c = 0; c < m.data.cols(); ++c) m.data(r, c) = standard_normal(rng);
    write_activations(m, activation_file(out / "activations", layer));
  }
  return 0;
}

void add_analyze_common(CLI::App* cmd, AnalyzeArgs& a, bool cv) {
  cmd->add_option("--run", a.runs, "Run directory written by `sips compute`")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--rating", a.ratings, "Rating names to analyze (default: all)");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--seed", a.seed, "Cross-validation seed (default: the run seed)");
  if (cv) {
    cmd->add_option("--reps", a.reps, "Cross-validation repetitions")->capture_default_str();
    cmd->add_option("--folds", a.folds, "Folds per repetition (2)")->capture_default_str();
    cmd->add_option("--threads", a.threads, "Worker threads (default: SIPKIT_THREADS or all cores)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical image properties: batch computation and rating analyses"};
  app.set_version_flag("--version", SIPKIT_VERSION);
  app.require_subcommand(1);

  ComputeArgs compute;
  auto* sips = app.add_subcommand("sips", "SIP computation")->require_subcommand(1);
  auto* sips_compute = sips->add_subcommand("compute", "Compute the SIP table of a manifest subsample");
  sips_compute->add_option("--manifest", compute.manifest, "Ratings CSV")->required()->check(CLI::ExistingFile);
  sips_compute->add_option("--meta", compute.meta, "Dataset metadata JSON")->required()->check(CLI::ExistingFile);
  sips_compute->add_option("--filters", compute.filters, "FILB filter bank")->required()->check(CLI::ExistingFile);
  sips_compute->add_option("--seed", compute.seed, "Subsample and edge-sampling seed")->required();
  sips_compute->add_option("--out", compute.out, "Run directory")->required();
  sips_compute->add_option("--n", compute.n, "Subsample size")->capture_default_str();
  sips_compute->add_option("--threads", compute.threads, "Worker threads (default: SIPKIT_THREADS or all cores)");
  sips_compute->add_option("--max-edges", compute.opts.max_edges, "Edge pixels kept per image")->capture_default_str();
  sips_compute->add_option("--edge-bins", compute.opts.edge_entropy.bins, "Edge-orientation histogram bins")
      ->capture_default_str();
  sips_compute->add_option("--fourier-lo", compute.opts.fourier.fit_lo, "Fourier fit start (cycles/image)")
      ->capture_default_str();
  sips_compute->add_option("--fourier-hi-frac", compute.opts.fourier.fit_hi_frac, "Fourier fit end (fraction of Nyquist)")
      ->capture_default_str();
  sips_compute->add_option("--phog-bins", compute.opts.phog_bins, "PHOG orientation bins")->capture_default_str();

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Rating analyses on computed runs")->require_subcommand(1);
  auto* correlate_cmd = an->add_subcommand("correlate", "Spearman correlations and pattern distances");
  add_analyze_common(correlate_cmd, analyze, false);
  correlate_cmd->add_flag("--emit-svg", analyze.svg, "Also write an SVG heatmap");
  auto* distance_cmd = an->add_subcommand("distance", "Pattern distances between rating columns");
  add_analyze_common(distance_cmd, analyze, false);
  auto* describe_cmd = an->add_subcommand("describe", "Min-max scaled box statistics per dataset");
  add_analyze_common(describe_cmd, analyze, false);
  describe_cmd->add_flag("--emit-svg", analyze.svg, "Also write SVG boxplots");
  auto* regress_cmd = an->add_subcommand("regress", "Forward-selected regression on SIPs and/or layers");
  add_analyze_common(regress_cmd, analyze, true);
  regress_cmd->add_option("--source", analyze.sources, "sips | layer:K | sips+layer:K (repeatable)")
      ->capture_default_str();
  regress_cmd->add_option("--activations", analyze.activations, "Directory of ACTV files");
  auto* probe_cmd = an->add_subcommand("probe", "Predict each SIP from layer PCA components");
  add_analyze_common(probe_cmd, analyze, true);
  probe_cmd->add_option("--activations", analyze.activations, "Directory of ACTV files")->required();
  probe_cmd->add_option("--layers", analyze.layers, "Layer list, e.g. 1-16 or 1,3,5")->capture_default_str();
  probe_cmd->add_option("--labels", analyze.labels, "image_id,label CSV for content classification")
      ->check(CLI::ExistingFile);
  probe_cmd->add_option("--class-reps", analyze.class_reps, "Repetitions for the classification CV")
      ->capture_default_str();
  probe_cmd->add_option("--class-features", analyze.class_features, "Feature cap for classifier selection")
      ->capture_default_str();

  SynthArgs synth;
  auto* syn = app.add_subcommand("synth", "Synthetic rated datasets")->require_subcommand(1);
  auto* syn_gen = syn->add_subcommand("generate", "Generate images, ratings and ground truth");
  syn_gen->add_option("--n", synth.n, "Number of images")->capture_default_str();
  syn_gen->add_option("--seed", synth.seed, "Seed")->required();
  syn_gen->add_option("--model", synth.model, "Model JSON")->check(CLI::ExistingFile);
  syn_gen->add_option("--filters", synth.filters, "FILB filter bank (default: random 8-filter bank)")
      ->check(CLI::ExistingFile);
  syn_gen->add_option("--out", synth.out, "Output directory")->required();
  syn_gen->add_option("--threads", synth.threads, "Worker threads");

  fs::path fixtures_out;
  auto* fixtures = app.add_subcommand("fixtures", "Write the miniature FILB/ACTV test fixtures");
  fixtures->add_option("--out", fixtures_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (sips_compute->parsed()) return run_compute(compute);
    if (correlate_cmd->parsed()) return run_correlate(analyze, true);
    if (distance_cmd->parsed()) return run_correlate(analyze, false);
    if (describe_cmd->parsed()) return run_describe(analyze);
    if (regress_cmd->parsed()) return run_regress(analyze);
    if (probe_cmd->parsed()) return run_probe(analyze);
    if (syn_gen->parsed()) return run_synth(synth);
    if (fixtures->parsed()) return run_fixtures(fixtures_out);
  } catch (const Error& e) {
    std::cerr << "sipkit: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sipkit: error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
