#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/reports.hpp"

namespace sipkit {

using nlohmann::ordered_json;

Metadata report_metadata(const std::string& report, std::uint64_t seed) {
  return {
      {"tool", "sipkit " SIPKIT_VERSION},
      {"report", report},
      {"seed", std::to_string(seed)},
      {"cv", "repeated 2-fold; holdout R2 adjusted with holdout n and subset size; adjusted then averaged; "
             "splits shared across subsets and steps"},
      {"selection", "strict improvement; ties to lower column index"},
      {"alpha", "0.05"},
  };
}

void write_run(const std::filesystem::path& dir, const AnalysisRun& run, const Metadata& metadata) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "sips.csv", sip_table_csv(run.table, metadata));
  write_text_file(dir / "sip_flags.csv", sip_flags_csv(run.table));

  std::ostringstream ratings;
  CsvWriter w(ratings);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  w.meta("ratings", "rescaled to [0,1] by the declared scale");
  std::vector<std::string> header{"image_id"};
  header.insert(header.end(), run.rating_names.begin(), run.rating_names.end());
  w.row(header);
  for (const auto& id : run.table.image_ids) {
    std::vector<std::string> cells{id};
    for (const auto& name : run.rating_names) cells.push_back(format_number(run.ratings.at(name).at(id)));
    w.row(cells);
  }
  write_text_file(dir / "ratings.csv", ratings.str());

  ordered_json j;
  j["dataset_id"] = run.table.dataset_id;
  j["seed"] = run.seed;
  j["requested"] = run.requested;
  j["selected"] = run.table.image_ids.size() + run.dropped.size();
  j["computed"] = run.table.image_ids.size();
  j["fixed_resolution"] = run.table.fixed_dims;
  j["rating_names"] = run.rating_names;
  j["dropped"] = ordered_json::array();
  for (const auto& d : run.dropped) j["dropped"].push_back({{"image_id", d.image_id}, {"reason", d.reason}});
  write_text_file(dir / "run.json", j.dump(2) + "\n");
}

AnalysisRun read_run(const std::filesystem::path& dir) {
  AnalysisRun run;
  std::ifstream in(dir / "run.json");
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + (dir / "run.json").string());
  try {
    const auto j = ordered_json::parse(in);
    run.seed = j.at("seed").get<std::uint64_t>();
    run.requested = j.at("requested").get<std::size_t>();
    run.rating_names = j.at("rating_names").get<std::vector<std::string>>();
    for (const auto& d : j.at("dropped")) run.dropped.push_back({d.at("image_id"), d.at("reason")});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, (dir / "run.json").string() + ": " + e.what());
  }

  run.table = read_sip_table(dir / "sips.csv");
  if (std::filesystem::exists(dir / "sip_flags.csv")) read_sip_flags(dir / "sip_flags.csv", run.table);

  const auto csv = read_csv(dir / "ratings.csv");
  const std::size_t id_col = csv.column("image_id");
  for (const auto& name : run.rating_names) {
    const std::size_t c = csv.column(name);
    auto& m = run.ratings[name];
    for (const auto& row : csv.rows) m[row[id_col]] = parse_number(row[c], name);
  }
  return run;
}

Eigen::VectorXd aligned_ratings(const AnalysisRun& run, const std::string& name) {
  const auto it = run.ratings.find(name);
  if (it == run.ratings.end()) throw Error(ErrorCode::SchemaError, "run has no rating '" + name + "'");
  Eigen::VectorXd y(static_cast<Eigen::Index>(run.table.image_ids.size()));
  for (std::size_t i = 0; i < run.table.image_ids.size(); ++i) {
    const auto r = it->second.find(run.table.image_ids[i]);
    if (r == it->second.end()) {
      throw Error(ErrorCode::AlignmentError, "image " + run.table.image_ids[i] + " has no '" + name + "' rating");
    }
    y[static_cast<Eigen::Index>(i)] = r->second;
  }
  return y;
}

Eigen::MatrixXd sip_matrix(const SipTable& table, std::vector<std::string>* names) {
  const auto cols = table.columns();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][cols[c]];
  if (names) {
    names->clear();
    for (auto s : cols) names->emplace_back(sip_name(s));
  }
  return x;
}

}  // namespace sipkit
