#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/random.hpp"

namespace sipkit {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct FlagName {
  std::uint32_t bit;
  const char* name;
};
constexpr FlagName kFlagNames[] = {
    {kFlagNoEdges, "no_edges"},
    {kFlagPhogDegenerate, "phog_degenerate"},
    {kFlagFourierDegenerate, "fourier_degenerate"},
};

}  // namespace

std::uint64_t image_seed(std::uint64_t run_seed, const std::string& image_id) {
  return substream_seed(run_seed, fnv1a(image_id), 0xED6Eu);
}

SipVector compute_sips(const RgbImage& img, const FilterBank& bank, std::uint64_t seed, const SipOptions& opts) {
  const auto disp = display_rescale(img, opts.display);
  const auto hsv = rgb_to_hsv(disp);
  const auto lab = rgb_to_lab(disp);
  const auto gray = to_grayscale(disp);

  SipVector v;
  const auto color = color_sips(hsv, lab);
  v[Sip::Hue] = color.hue;
  v[Sip::Saturation] = color.saturation;
  v[Sip::Luminance] = color.luminance;
  v[Sip::LabA] = color.lab_a;
  v[Sip::LabB] = color.lab_b;
  v[Sip::ColorEntropy] = color.color_entropy;
  const auto geom = geometry_sips(disp.width, disp.height);
  v[Sip::AspectRatio] = geom.aspect_ratio;
  v[Sip::ImageSize] = geom.image_size;
  v[Sip::Contrast] = contrast_rms(lab);
  v[Sip::LuminanceEntropy] = luminance_entropy(lab);

  try {
    auto eo = opts.edge_entropy;
    eo.seed = seed;
    v[Sip::EdgeEntropy] = edge_orientation_entropy(extract_edges(gray, opts.max_edges), eo);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateImage && e.code() != ErrorCode::InsufficientEdges) throw;
    v.flags |= kFlagNoEdges;
  }

  const auto phog = phog_sips(build_phog(gray, opts.phog_levels, opts.phog_bins));
  if (phog.degenerate) v.flags |= kFlagPhogDegenerate;
  v[Sip::SelfSimilarity] = phog.self_similarity;
  v[Sip::Complexity] = phog.complexity;
  v[Sip::Anisotropy] = phog.anisotropy;

  try {
    const auto f = fourier_sips(gray, opts.fourier);
    v[Sip::FourierSlope] = f.slope;
    v[Sip::FourierSigma] = f.sigma;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateImage) throw;
    v.flags |= kFlagFourierDegenerate;
  }

  const auto cnn = cnn_filter_sips(disp, bank, opts.pool_grid);
  v[Sip::SymmetryLr] = cnn.symmetry_lr;
  v[Sip::SymmetryUd] = cnn.symmetry_ud;
  v[Sip::Sparseness] = cnn.sparseness;
  v[Sip::Variability] = cnn.variability;

  for (std::size_t i = 0; i < kSipCount; ++i) {
    if (!std::isfinite(v.values[i])) {
      throw Error(ErrorCode::NonFiniteData, std::string(kSipNames[i]) + " is not finite");
    }
  }
  return v;
}

std::vector<Sip> SipTable::columns() const {
  std::vector<Sip> cols;
  for (std::size_t i = 0; i < kSipCount; ++i) {
    const auto s = static_cast<Sip>(i);
    if (fixed_dims && is_geometry_sip(s)) continue;
    cols.push_back(s);
  }
  return cols;
}

std::size_t SipTable::find(const std::string& image_id) const {
  const auto it = std::lower_bound(image_ids.begin(), image_ids.end(), image_id);
  if (it == image_ids.end() || *it != image_id) return npos;
  return static_cast<std::size_t>(it - image_ids.begin());
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("SIPKIT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SipRunResult compute_sip_table(const RatingsManifest& manifest, const std::vector<std::string>& image_ids,
                               const FilterBank& bank, std::uint64_t seed, const SipOptions& opts,
                               std::size_t threads, const std::function<void(const std::string&)>& log) {
  std::map<std::string, const ManifestEntry*> by_id;
  for (const auto& e : manifest.entries) by_id[e.image_id] = &e;
  std::vector<std::string> ids = image_ids;
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    if (!by_id.count(id)) throw Error(ErrorCode::AlignmentError, "image id " + id + " is not in the manifest");
  }

  std::vector<SipVector> rows(ids.size());
  std::vector<std::string> failure(ids.size());
  std::vector<char> ok(ids.size(), 0);
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    try {
      const auto img = load_image(by_id.at(ids[i])->image_path);
      rows[i] = compute_sips(img, bank, image_seed(seed, ids[i]), opts);
      ok[i] = 1;
    } catch (const Error& e) {
      failure[i] = e.what();
    }
  });

  SipRunResult result;
  result.table.dataset_id = manifest.dataset_id;
  result.table.fixed_dims = manifest.fixed_resolution;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ok[i]) {
      result.table.image_ids.push_back(ids[i]);
      result.table.rows.push_back(rows[i]);
    } else {
      result.dropped.push_back({ids[i], failure[i]});
      if (log) log("dropped " + ids[i] + ": " + failure[i]);
    }
  }
  if (static_cast<double>(result.dropped.size()) > 0.05 * static_cast<double>(ids.size())) {
    throw Error(ErrorCode::RunFailed, std::to_string(result.dropped.size()) + " of " + std::to_string(ids.size()) +
                                          " images failed (budget 5%); first: " + result.dropped.front().image_id +
                                          ": " + result.dropped.front().reason);
  }
  return result;
}

std::string sip_table_csv(const SipTable& table, const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& [k, v] : metadata) w.meta(k, v);
  std::vector<std::string> header{"image_id"};
  for (auto name : kSipNames) header.emplace_back(name);
  w.row(header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> cells{table.image_ids[r]};
    for (std::size_t i = 0; i < kSipCount; ++i) {
      const bool omit = table.fixed_dims && is_geometry_sip(static_cast<Sip>(i));
      cells.push_back(omit ? std::string() : format_number(table.rows[r].values[i]));
    }
    w.row(cells);
  }
  return out.str();
}

SipTable read_sip_table(const std::filesystem::path& path) {
  const auto csv = read_csv(path);
  SipTable t;
  for (const auto& [k, v] : csv.metadata) {
    if (k == "dataset_id") t.dataset_id = v;
    if (k == "fixed_resolution") t.fixed_dims = v == "true";
  }
  const std::size_t id_col = csv.column("image_id");
  std::array<std::size_t, kSipCount> cols{};
  for (std::size_t i = 0; i < kSipCount; ++i) cols[i] = csv.column(kSipNames[i]);
  std::vector<std::pair<std::string, SipVector>> rows;
  for (const auto& row : csv.rows) {
    SipVector v;
    for (std::size_t i = 0; i < kSipCount; ++i) {
      const auto& cell = row[cols[i]];
      if (cell.empty() && t.fixed_dims && is_geometry_sip(static_cast<Sip>(i))) continue;
      v.values[i] = parse_number(cell, kSipNames[i]);
    }
    rows.emplace_back(row[id_col], v);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) throw Error(ErrorCode::SchemaError, "duplicate image id " + rows[i].first);
  }
  for (auto& [id, v] : rows) {
    t.image_ids.push_back(id);
    t.rows.push_back(v);
  }
  return t;
}

std::vector<std::string> flag_names(std::uint32_t flags) {
  std::vector<std::string> out;
  for (const auto& f : kFlagNames)
    if (flags & f.bit) out.emplace_back(f.name);
  return out;
}

std::string sip_flags_csv(const SipTable& table) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"image_id", "flags"});
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::string joined;
    for (const auto& n : flag_names(table.rows[r].flags)) joined += (joined.empty() ? "" : ";") + n;
    w.row({table.image_ids[r], joined});
  }
  return out.str();
}

void read_sip_flags(const std::filesystem::path& path, SipTable& table) {
  const auto csv = read_csv(path);
  const std::size_t id_col = csv.column("image_id"), flag_col = csv.column("flags");
  for (const auto& row : csv.rows) {
    const std::size_t r = table.find(row[id_col]);
    if (r == npos) throw Error(ErrorCode::AlignmentError, "flags for unknown image " + row[id_col]);
    std::uint32_t flags = 0;
    std::string_view rest = row[flag_col];
    while (!rest.empty()) {
      const auto cut = rest.find(';');
      const auto name = rest.substr(0, cut);
      bool known = false;
      for (const auto& f : kFlagNames) {
        if (name == f.name) {
          flags |= f.bit;
          known = true;
        }
      }
      if (!known) throw Error(ErrorCode::SchemaError, "unknown SIP flag '" + std::string(name) + "'");
      rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
    }
    table.rows[r].flags = flags;
  }
}

}  // namespace sipkit
