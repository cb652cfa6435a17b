#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sipkit/image.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/sip_cnnfilter.hpp"

namespace sipkit {

// Declared generative model for a synthetic rated dataset:
//   rating = sum_k w_k * z(SIP_k) + N(0, noise_sd^2)
// with z-scores over the generated images (population sd).
struct SynthModel {
  std::string dataset_id = "synth";
  std::string rating_name = "rating";
  std::map<std::string, double> weights{{"fourier_slope", 0.6}, {"contrast", 0.4}};
  double noise_sd = 0.5;
  std::size_t min_size = 200;
  std::size_t max_size = 480;

  // Pseudo activations: each layer is a random linear mixture of the z-scored
  // SIPs plus Gaussian noise. `inject` copies a raw SIP into column 0.
  std::size_t layers = 0;
  std::size_t layer_dims = 32;
  double activation_noise = 0.1;
  std::map<std::uint32_t, std::string> inject;
};

/// Reads a model from JSON; absent keys keep their defaults. Throws SchemaError.
SynthModel parse_synth_model(const std::string& json_text);
SynthModel load_synth_model(const std::filesystem::path& path);

enum class SynthFamily { Noise, Grating, Symmetric, Gradient };

struct SynthImageParams {
  SynthFamily family = SynthFamily::Noise;
  std::size_t width = 256;
  std::size_t height = 256;
  double slope = -2.0;      // power spectrum exponent of the texture
  double mean = 0.5;        // gray level
  double amplitude = 0.1;   // texture sd before clipping
  bool bright = true;
  std::array<double, 3> tint{};
  std::uint64_t seed = 0;
};

/// Draws per-image parameters for image `index` of a run.
SynthImageParams draw_synth_params(const SynthModel& model, std::uint64_t seed, std::size_t index);
RgbImage render_synth_image(const SynthImageParams& p);

struct SynthResult {
  SipTable table;  // SIPs of the written 8-bit images
  std::vector<double> ratings;  // parallel to table rows
  double analytic_r2 = 0.0;
};

// Writes images/, manifest.csv, meta.json, truth.json and content.csv (plus
// activations/ when model.layers > 0) under `out`. SIPs use the same
// per-image seeds as `sips compute --seed seed`.
SynthResult synth_generate(const SynthModel& model, std::size_t n, std::uint64_t seed, const FilterBank& bank,
                           const std::filesystem::path& out, std::size_t threads = 0);

}  // namespace sipkit
