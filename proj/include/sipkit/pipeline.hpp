#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sipkit/image.hpp"
#include "sipkit/sip_basic.hpp"
#include "sipkit/sip_cnnfilter.hpp"
#include "sipkit/sip_structure.hpp"

namespace sipkit {

// ------------------------------------------------------------- manifests

struct RatingScale {
  double min = 0.0;
  double max = 1.0;
};

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;  // resolved against the manifest directory
  std::vector<double> ratings;       // parallel to RatingsManifest::rating_names
};

struct RatingsManifest {
  std::string dataset_id;
  std::vector<std::string> rating_names;
  std::map<std::string, RatingScale> scales;
  bool fixed_resolution = false;
  std::vector<ManifestEntry> entries;  // file order

  std::size_t rating_index(const std::string& name) const;  // throws SchemaError
};

// CSV header `image_id,image_path,<rating>...`; meta JSON
// {"dataset_id": ..., "scales": {name: [min, max]}, "fixed_resolution": bool}.
// Throws SchemaError, ScaleViolation (row and value in the message) and
// MissingImage. With check_images = false image paths are not probed.
RatingsManifest load_manifest(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                              bool check_images = true);

// Uniform sample without replacement, returned in manifest order. The whole
// manifest is returned when it has at most n entries.
std::vector<std::string> subsample(const RatingsManifest& manifest, std::size_t n, std::uint64_t seed);

/// (v - min) / (max - min) per image. Throws ZeroWidthScale.
std::map<std::string, double> rescale_ratings(const RatingsManifest& manifest, const std::string& rating_name);

// ------------------------------------------------------------ SIP tables

struct SipOptions {
  DisplayLimits display{};
  std::size_t max_edges = 10000;
  EdgeEntropyOptions edge_entropy{};  // seed is replaced per image
  std::size_t phog_levels = 3;
  std::size_t phog_bins = 16;
  FourierOptions fourier{};
  std::size_t pool_grid = 12;
};

// All 20 SIPs of one decoded image. Degenerate structure (no gradient, flat
// spectrum) yields zeros plus flags; images too small for an operator throw.
// `seed` drives the edge-pair sample only.
SipVector compute_sips(const RgbImage& img, const FilterBank& bank, std::uint64_t seed, const SipOptions& opts = {});

/// Per-image seed derived from the run seed and the image id (order independent).
std::uint64_t image_seed(std::uint64_t run_seed, const std::string& image_id);

struct SipTable {
  std::string dataset_id;
  bool fixed_dims = false;  // geometry SIPs absent
  std::vector<std::string> image_ids;  // sorted
  std::vector<SipVector> rows;

  /// SIPs present in the table, canonical order.
  std::vector<Sip> columns() const;
  std::size_t find(const std::string& image_id) const;  // npos if absent
};

struct DroppedImage {
  std::string image_id;
  std::string reason;
};

struct SipRunResult {
  SipTable table;
  std::vector<DroppedImage> dropped;
};

// Loads and measures the selected images on a worker pool. Failures are
// logged through `log` and dropped; more than 5% dropped throws RunFailed.
SipRunResult compute_sip_table(const RatingsManifest& manifest, const std::vector<std::string>& image_ids,
                               const FilterBank& bank, std::uint64_t seed, const SipOptions& opts = {},
                               std::size_t threads = 0,
                               const std::function<void(const std::string&)>& log = {});

// CSV with header `image_id,<20 SIP names>`; geometry cells empty when
// fixed_dims. Degeneracy flags go to a sidecar written by write_sip_flags.
std::string sip_table_csv(const SipTable& table, const std::vector<std::pair<std::string, std::string>>& metadata);
SipTable read_sip_table(const std::filesystem::path& path);
std::string sip_flags_csv(const SipTable& table);
void read_sip_flags(const std::filesystem::path& path, SipTable& table);

std::vector<std::string> flag_names(std::uint32_t flags);

// --------------------------------------------------------------- threads

/// Worker count from SIPKIT_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown (lowest index first) after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace sipkit
