#include "sipkit/sip_basic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sipkit/error.hpp"

namespace sipkit {

namespace {

constexpr std::size_t kHistBins = 256;

std::size_t bin_of(double v, double lo, double hi) {
  const double t = (v - lo) / (hi - lo);
  if (!(t > 0.0)) return 0;
  return std::min(kHistBins - 1, static_cast<std::size_t>(t * static_cast<double>(kHistBins)));
}

}  // namespace

std::string_view sip_name(Sip s) { return kSipNames[static_cast<std::size_t>(s)]; }

std::optional<Sip> sip_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSipCount; ++i) {
    if (kSipNames[i] == name) return static_cast<Sip>(i);
  }
  return std::nullopt;
}

bool is_geometry_sip(Sip s) { return s == Sip::AspectRatio || s == Sip::ImageSize; }

double circular_mean_hue(std::span<const double> hues) {
  double c = 0.0, s = 0.0;
  for (double h : hues) {
    const double angle = 2.0 * std::numbers::pi * h;
    c += std::cos(angle);
    s += std::sin(angle);
  }
  if (std::hypot(c, s) <= 1e-12 * static_cast<double>(std::max<std::size_t>(hues.size(), 1))) return 0.0;
  double mean = std::atan2(s, c) / (2.0 * std::numbers::pi);
  if (mean < 0.0) mean += 1.0;
  if (mean >= 1.0) mean -= 1.0;
  return mean;
}

double shannon_entropy(std::span<const double> histogram) {
  double total = 0.0;
  for (double v : histogram) total += v;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : histogram) {
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log2(p);
    }
  }
  return std::max(h, 0.0);
}

ColorSips color_sips(const HsvImage& hsv, const LabImage& lab) {
  if (hsv.size() != lab.size() || hsv.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "HSV and Lab images differ in size");
  }
  const auto n = static_cast<double>(hsv.size());
  std::vector<double> hues(hsv.size());
  std::vector<double> hist(kHistBins, 0.0);
  double sat = 0.0;
  for (std::size_t i = 0; i < hsv.size(); ++i) {
    hues[i] = hsv.pixels[i][0];
    sat += hsv.pixels[i][1];
    hist[bin_of(hues[i], 0.0, 1.0)] += 1.0;
  }
  double l = 0.0, a = 0.0, b = 0.0;
  for (const auto& px : lab.pixels) {
    l += px[0];
    a += px[1];
    b += px[2];
  }
  ColorSips out;
  out.hue = circular_mean_hue(hues);
  out.saturation = sat / n;
  out.luminance = l / n;
  out.lab_a = a / n;
  out.lab_b = b / n;
  out.color_entropy = shannon_entropy(hist);
  return out;
}

GeometrySips geometry_sips(std::size_t display_width, std::size_t display_height) {
  if (display_width == 0 || display_height == 0) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  }
  const auto w = static_cast<double>(display_width);
  const auto h = static_cast<double>(display_height);
  return {w / h, w + h};
}

double contrast_rms(const LabImage& lab) {
  if (lab.size() == 0) return 0.0;
  const auto n = static_cast<double>(lab.size());
  const auto [lo, hi] = std::minmax_element(lab.pixels.begin(), lab.pixels.end(),
                                            [](const auto& p, const auto& q) { return p[0] < q[0]; });
  if ((*lo)[0] == (*hi)[0]) return 0.0;
  double mean = 0.0;
  for (const auto& px : lab.pixels) mean += px[0];
  mean /= n;
  double ss = 0.0;
  for (const auto& px : lab.pixels) ss += (px[0] - mean) * (px[0] - mean);
  return std::sqrt(ss / n);
}

double luminance_entropy(const LabImage& lab) {
  std::vector<double> hist(kHistBins, 0.0);
  for (const auto& px : lab.pixels) hist[bin_of(px[0], 0.0, 100.0)] += 1.0;
  return shannon_entropy(hist);
}

}  // namespace sipkit
