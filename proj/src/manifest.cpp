#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/random.hpp"

namespace sipkit {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

}  // namespace

std::size_t RatingsManifest::rating_index(const std::string& name) const {
  const auto it = std::find(rating_names.begin(), rating_names.end(), name);
  if (it == rating_names.end()) throw Error(ErrorCode::SchemaError, "unknown rating '" + name + "'");
  return static_cast<std::size_t>(it - rating_names.begin());
}

RatingsManifest load_manifest(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                              bool check_images) {
  const auto meta = read_json(meta_path);
  RatingsManifest m;
  try {
    m.dataset_id = meta.at("dataset_id").get<std::string>();
    m.fixed_resolution = meta.value("fixed_resolution", false);
    for (const auto& [name, range] : meta.at("scales").items()) {
      if (!range.is_array() || range.size() != 2) {
        throw Error(ErrorCode::SchemaError, meta_path.string() + ": scale '" + name + "' must be [min, max]");
      }
      m.scales[name] = {range[0].get<double>(), range[1].get<double>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, meta_path.string() + ": " + e.what());
  }
  if (m.dataset_id.empty()) throw Error(ErrorCode::SchemaError, meta_path.string() + ": empty dataset_id");

  const auto table = read_csv(csv_path);
  if (table.header.size() < 3 || table.header[0] != "image_id" || table.header[1] != "image_path") {
    throw Error(ErrorCode::SchemaError,
                csv_path.string() + ": header must be image_id,image_path,<rating>... with at least one rating");
  }
  m.rating_names.assign(table.header.begin() + 2, table.header.end());
  for (const auto& name : m.rating_names) {
    if (!m.scales.count(name)) throw Error(ErrorCode::SchemaError, "rating '" + name + "' has no declared scale");
  }
  if (std::set<std::string>(m.rating_names.begin(), m.rating_names.end()).size() != m.rating_names.size()) {
    throw Error(ErrorCode::SchemaError, csv_path.string() + ": duplicate rating column");
  }

  const auto base = csv_path.parent_path();
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ManifestEntry e;
    e.image_id = row[0];
    if (e.image_id.empty()) throw Error(ErrorCode::SchemaError, "row " + std::to_string(r + 1) + ": empty image_id");
    if (!seen.insert(e.image_id).second) {
      throw Error(ErrorCode::SchemaError, "row " + std::to_string(r + 1) + ": duplicate image_id " + e.image_id);
    }
    const std::filesystem::path p(row[1]);
    e.image_path = p.is_absolute() ? p : base / p;
    for (std::size_t k = 0; k < m.rating_names.size(); ++k) {
      const auto& name = m.rating_names[k];
      const double v = parse_number(row[k + 2], name);
      const auto& s = m.scales.at(name);
      if (v < s.min || v > s.max) {
        throw Error(ErrorCode::ScaleViolation, "row " + std::to_string(r + 1) + " (" + e.image_id + "): " + name +
                                                   " = " + row[k + 2] + " outside [" + format_number(s.min) + ", " +
                                                   format_number(s.max) + "]");
      }
      e.ratings.push_back(v);
    }
    if (check_images && !std::filesystem::is_regular_file(e.image_path)) {
      throw Error(ErrorCode::MissingImage, "row " + std::to_string(r + 1) + ": " + e.image_path.string());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::vector<std::string> subsample(const RatingsManifest& manifest, std::size_t n, std::uint64_t seed) {
  const std::size_t total = manifest.entries.size();
  std::vector<std::size_t> picked;
  if (total <= n) {
    picked.resize(total);
    for (std::size_t i = 0; i < total; ++i) picked[i] = i;
  } else {
    std::mt19937_64 rng(substream_seed(seed, 0x5u));
    auto perm = random_permutation(total, rng);
    picked.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(picked.begin(), picked.end());
  }
  std::vector<std::string> ids;
  ids.reserve(picked.size());
  for (std::size_t i : picked) ids.push_back(manifest.entries[i].image_id);
  return ids;
}

std::map<std::string, double> rescale_ratings(const RatingsManifest& manifest, const std::string& rating_name) {
  const std::size_t k = manifest.rating_index(rating_name);
  const auto& s = manifest.scales.at(rating_name);
  const double width = s.max - s.min;
  if (!(width > 0.0)) throw Error(ErrorCode::ZeroWidthScale, "scale of '" + rating_name + "' has zero width");
  std::map<std::string, double> out;
  for (const auto& e : manifest.entries) out[e.image_id] = (e.ratings[k] - s.min) / width;
  return out;
}

}  // namespace sipkit
