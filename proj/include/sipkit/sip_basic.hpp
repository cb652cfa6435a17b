#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sipkit/image.hpp"

namespace sipkit {

// Canonical SIP order. CSV columns, report rows and tie-breaking in
// feature selection all follow this order.
enum class Sip : std::size_t {
  Hue,
  Saturation,
  Luminance,
  LabA,
  LabB,
  ColorEntropy,
  AspectRatio,
  ImageSize,
  Contrast,
  LuminanceEntropy,
  EdgeEntropy,
  SelfSimilarity,
  Complexity,
  Anisotropy,
  FourierSlope,
  FourierSigma,
  SymmetryLr,
  SymmetryUd,
  Sparseness,
  Variability,
};

inline constexpr std::size_t kSipCount = 20;

inline constexpr std::array<std::string_view, kSipCount> kSipNames = {
    "hue",          "saturation",        "luminance",    "lab_a",           "lab_b",
    "color_entropy", "aspect_ratio",     "image_size",   "contrast",        "luminance_entropy",
    "edge_entropy", "self_similarity",   "complexity",   "anisotropy",      "fourier_slope",
    "fourier_sigma", "symmetry_lr",      "symmetry_ud",  "sparseness",      "variability",
};

std::string_view sip_name(Sip s);
std::optional<Sip> sip_from_name(std::string_view name);
bool is_geometry_sip(Sip s);

// Degeneracy markers recorded alongside a SipVector.
enum SipFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagNoEdges = 1u << 0,      // no gradient; edge_entropy set to 0
  kFlagPhogDegenerate = 1u << 1,  // no gradient mass; PHOG SIPs set to 0
  kFlagFourierDegenerate = 1u << 2,  // flat spectrum in fit range; Fourier SIPs set to 0
};

struct SipVector {
  std::array<double, kSipCount> values{};
  std::uint32_t flags = kFlagNone;

  double& operator[](Sip s) { return values[static_cast<std::size_t>(s)]; }
  double operator[](Sip s) const { return values[static_cast<std::size_t>(s)]; }
};

struct ColorSips {
  double hue = 0.0;
  double saturation = 0.0;
  double luminance = 0.0;
  double lab_a = 0.0;
  double lab_b = 0.0;
  double color_entropy = 0.0;
};

struct GeometrySips {
  double aspect_ratio = 0.0;
  double image_size = 0.0;
};

/// Circular mean of hues in [0,1), returned in [0,1). Zero resultant maps to 0.
double circular_mean_hue(std::span<const double> hues);

/// Shannon entropy in bits of a histogram of counts (or weights); 0 log 0 = 0.
double shannon_entropy(std::span<const double> histogram);

ColorSips color_sips(const HsvImage& hsv, const LabImage& lab);
GeometrySips geometry_sips(std::size_t display_width, std::size_t display_height);

// Population standard deviation of the CIELAB L channel.
double contrast_rms(const LabImage& lab);

// Entropy of a 256-bin histogram of L over [0,100].
double luminance_entropy(const LabImage& lab);

}  // namespace sipkit
