#include "sipkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sipkit/activations.hpp"
#include "sipkit/csv.hpp"
#include "sipkit/error.hpp"
#include "sipkit/fft.hpp"
#include "sipkit/random.hpp"

namespace sipkit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

enum Stream : std::uint64_t { kImage = 1, kRating = 2, kMixing = 3, kActNoise = 4 };

std::string image_id(std::size_t i) {
  std::string digits = std::to_string(i);
  return "synth_" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

void normalize(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
}

// Gaussian noise with power spectrum ~ f^slope on an n x n grid.
std::vector<double> power_law_noise(std::size_t n, double slope, std::mt19937_64& rng) {
  std::vector<std::complex<double>> field(n * n);
  for (auto& c : field) c = standard_normal(rng);
  auto spec = fft2d(field, n, n);
  auto freq = [n](std::size_t k) {
    return k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  };
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      const double f = std::hypot(freq(u), freq(v));
      spec[v * n + u] *= f > 0.0 ? std::pow(f, slope / 2.0) : 0.0;
    }
  }
  const auto back = fft2d(spec, n, n, true);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = back[i].real();
  normalize(out);
  return out;
}

std::vector<std::vector<double>> z_columns(const SipTable& table) {
  std::vector<std::vector<double>> z(kSipCount, std::vector<double>(table.rows.size()));
  for (std::size_t j = 0; j < kSipCount; ++j) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) z[j][r] = table.rows[r].values[j];
    normalize(z[j]);
  }
  return z;
}

}  // namespace

SynthModel parse_synth_model(const std::string& json_text) {
  SynthModel m;
  try {
    const auto j = json::parse(json_text);
    m.dataset_id = j.value("dataset_id", m.dataset_id);
    m.rating_name = j.value("rating_name", m.rating_name);
    if (j.contains("weights")) m.weights = j.at("weights").get<std::map<std::string, double>>();
    m.noise_sd = j.value("noise_sd", m.noise_sd);
    m.min_size = j.value("min_size", m.min_size);
    m.max_size = j.value("max_size", m.max_size);
    m.layers = j.value("layers", m.layers);
    m.layer_dims = j.value("layer_dims", m.layer_dims);
    m.activation_noise = j.value("activation_noise", m.activation_noise);
    if (j.contains("inject")) {
      for (const auto& [k, v] : j.at("inject").items()) m.inject[static_cast<std::uint32_t>(std::stoul(k))] = v;
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("synth model: ") + e.what());
  }
  for (const auto& [name, w] : m.weights) {
    if (!sip_from_name(name)) throw Error(ErrorCode::SchemaError, "synth model: unknown SIP '" + name + "'");
  }
  for (const auto& [layer, name] : m.inject) {
    if (!sip_from_name(name)) throw Error(ErrorCode::SchemaError, "synth model: unknown SIP '" + name + "'");
    if (layer == 0 || layer > m.layers) {
      throw Error(ErrorCode::SchemaError, "synth model: inject layer " + std::to_string(layer) + " out of range");
    }
  }
  if (m.min_size < 64 || m.max_size < m.min_size) throw Error(ErrorCode::SchemaError, "synth model: bad size range");
  if (!(m.noise_sd >= 0.0)) throw Error(ErrorCode::SchemaError, "synth model: noise_sd must be >= 0");
  if (m.layers > 0 && m.layer_dims < 2) throw Error(ErrorCode::SchemaError, "synth model: layer_dims must be >= 2");
  return m;
}

SynthModel load_synth_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synth_model(ss.str());
}

SynthImageParams draw_synth_params(const SynthModel& model, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(substream_seed(seed, kImage, index));
  SynthImageParams p;
  p.seed = rng();
  p.family = static_cast<SynthFamily>(bounded(rng, 4));
  const auto span = model.max_size - model.min_size + 1;
  p.width = model.min_size + bounded(rng, span);
  p.height = model.min_size + bounded(rng, span);
  p.slope = uniform(rng, -3.5, -1.5);
  p.bright = bounded(rng, 2) == 1;
  p.mean = p.bright ? uniform(rng, 0.6, 0.72) : uniform(rng, 0.28, 0.4);
  p.amplitude = uniform(rng, 0.03, 0.15);
  const double strength = uniform(rng, 0.0, 0.08);
  for (auto& t : p.tint) t = strength * (2.0 * uniform01(rng) - 1.0);
  return p;
}

RgbImage render_synth_image(const SynthImageParams& p) {
  std::mt19937_64 rng(p.seed);
  const std::size_t n = std::max(p.width, p.height);
  const auto noise = power_law_noise(n, p.slope, rng);
  std::vector<double> tex(p.width * p.height);
  for (std::size_t y = 0; y < p.height; ++y)
    for (std::size_t x = 0; x < p.width; ++x) tex[y * p.width + x] = noise[y * n + x];

  const double w = static_cast<double>(p.width), h = static_cast<double>(p.height);
  switch (p.family) {
    case SynthFamily::Noise:
      break;
    case SynthFamily::Grating: {
      const double theta = uniform(rng, 0.0, std::numbers::pi);
      const double cycles = uniform(rng, 3.0, 20.0);
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      for (std::size_t y = 0; y < p.height; ++y) {
        for (std::size_t x = 0; x < p.width; ++x) {
          const double t = (std::cos(theta) * static_cast<double>(x) + std::sin(theta) * static_cast<double>(y)) / w;
          tex[y * p.width + x] = 0.8 * tex[y * p.width + x] + 0.6 * std::sin(2.0 * std::numbers::pi * cycles * t + phase);
        }
      }
      break;
    }
    case SynthFamily::Symmetric:
      for (std::size_t y = 0; y < p.height; ++y)
        for (std::size_t x = p.width / 2; x < p.width; ++x) tex[y * p.width + x] = tex[y * p.width + (p.width - 1 - x)];
      break;
    case SynthFamily::Gradient: {
      const double gx = uniform(rng, -1.0, 1.0), gy = uniform(rng, -1.0, 1.0);
      for (std::size_t y = 0; y < p.height; ++y)
        for (std::size_t x = 0; x < p.width; ++x)
          tex[y * p.width + x] += 1.5 * (gx * (static_cast<double>(x) / w - 0.5) + gy * (static_cast<double>(y) / h - 0.5));
      break;
    }
  }
  normalize(tex);

  RgbImage img(p.width, p.height);
  for (std::size_t i = 0; i < tex.size(); ++i) {
    const double g = p.mean + p.amplitude * tex[i];
    for (std::size_t c = 0; c < 3; ++c) img.pixels[i][c] = std::clamp(g + p.tint[c], 0.0, 1.0);
  }
  return img;
}

SynthResult synth_generate(const SynthModel& model, std::size_t n, std::uint64_t seed, const FilterBank& bank,
                           const std::filesystem::path& out, std::size_t threads) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "synthetic datasets need at least 3 images");
  std::filesystem::create_directories(out / "images");

  std::vector<SynthImageParams> params(n);
  std::vector<SipVector> sips(n);
  parallel_for(n, threads, [&](std::size_t i) {
    params[i] = draw_synth_params(model, seed, i);
    const auto path = out / "images" / (image_id(i) + ".png");
    save_png(render_synth_image(params[i]), path);
    sips[i] = compute_sips(load_image(path), bank, image_seed(seed, image_id(i)));
  });

  SynthResult res;
  res.table.dataset_id = model.dataset_id;
  for (std::size_t i = 0; i < n; ++i) {
    res.table.image_ids.push_back(image_id(i));
    res.table.rows.push_back(sips[i]);
  }
  const auto z = z_columns(res.table);

  std::vector<double> signal(n, 0.0);
  for (const auto& [name, w] : model.weights) {
    const auto j = static_cast<std::size_t>(*sip_from_name(name));
    for (std::size_t i = 0; i < n; ++i) signal[i] += w * z[j][i];
  }
  double mean = 0.0, var = 0.0;
  for (double s : signal) mean += s;
  mean /= static_cast<double>(n);
  for (double s : signal) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n);
  const double noise_var = model.noise_sd * model.noise_sd;
  res.analytic_r2 = var + noise_var > 0.0 ? var / (var + noise_var) : 0.0;

  res.ratings.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(substream_seed(seed, kRating, i));
    res.ratings[i] = signal[i] + model.noise_sd * standard_normal(rng);
  }
  const auto [lo, hi] = std::minmax_element(res.ratings.begin(), res.ratings.end());

  std::ostringstream manifest, content;
  CsvWriter mw(manifest), cw(content);
  mw.row({"image_id", "image_path", model.rating_name});
  cw.row({"image_id", "label"});
  for (std::size_t i = 0; i < n; ++i) {
    mw.row({image_id(i), "images/" + image_id(i) + ".png", format_number(res.ratings[i])});
    cw.row({image_id(i), params[i].bright ? "bright" : "dark"});
  }
  write_text_file(out / "manifest.csv", manifest.str());
  write_text_file(out / "content.csv", content.str());

  ordered_json meta;
  meta["dataset_id"] = model.dataset_id;
  meta["scales"][model.rating_name] = {*lo, *hi};
  meta["fixed_resolution"] = false;
  write_text_file(out / "meta.json", meta.dump(2) + "\n");

  ordered_json truth;
  truth["seed"] = seed;
  truth["n"] = n;
  truth["rating_name"] = model.rating_name;
  truth["weights"] = model.weights;
  truth["noise_sd"] = model.noise_sd;
  truth["signal_variance"] = var;
  truth["analytic_r2"] = res.analytic_r2;
  truth["layers"] = model.layers;
  truth["layer_dims"] = model.layer_dims;
  for (const auto& [layer, name] : model.inject) truth["inject"][std::to_string(layer)] = name;
  write_text_file(out / "truth.json", truth.dump(2) + "\n");

  if (model.layers > 0) std::filesystem::create_directories(out / "activations");
  for (std::uint32_t layer = 1; layer <= model.layers; ++layer) {
    ActivationMatrix act;
    act.layer_id = layer;
    act.image_ids = res.table.image_ids;
    const auto d = static_cast<Eigen::Index>(model.layer_dims);
    std::mt19937_64 mix(substream_seed(seed, kMixing, layer));
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(kSipCount), d);
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r < weights.rows(); ++r) weights(r, c) = standard_normal(mix) / std::sqrt(kSipCount * 1.0);
    Eigen::MatrixXd zm(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kSipCount));
    for (std::size_t j = 0; j < kSipCount; ++j)
      for (std::size_t i = 0; i < n; ++i) zm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j][i];
    act.data = zm * weights;
    std::mt19937_64 noise(substream_seed(seed, kActNoise, layer));
    for (Eigen::Index i = 0; i < act.data.rows(); ++i)
      for (Eigen::Index c = 0; c < d; ++c) act.data(i, c) += model.activation_noise * standard_normal(noise);
    if (const auto it = model.inject.find(layer); it != model.inject.end()) {
      const auto s = *sip_from_name(it->second);
      for (std::size_t i = 0; i < n; ++i) act.data(static_cast<Eigen::Index>(i), 0) = sips[i][s];
    }
    write_activations(act, activation_file(out / "activations", layer));
  }
  return res;
}

}  // namespace sipkit
