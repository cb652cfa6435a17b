#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "sipkit/image.hpp"

namespace sipkit {

/// Sobel gradients for every pixel, replicating the border.
struct GradientField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
};

GradientField sobel(const GrayImage& gray);

struct EdgeSet {
  std::vector<std::array<std::size_t, 2>> positions;
  std::vector<double> orientations;  // [0, pi)
  std::vector<double> magnitudes;

  std::size_t size() const { return orientations.size(); }
};

// Strongest interior Sobel responses, at most max_edges of them. Ties in
// magnitude are broken by raster order.
// Throws ImageTooSmall below 3x3 and DegenerateImage when no gradient exists.
EdgeSet extract_edges(const GrayImage& gray, std::size_t max_edges = 10000);

struct EdgeEntropyOptions {
  std::size_t bins = 24;
  std::size_t max_pairs = 1'000'000;
  std::uint64_t seed = 0;
};

// Second-order edge-orientation entropy. Relative orientations of edge
// pairs are folded onto [0, pi/2] and histogrammed; all pairs are used when
// they number at most max_pairs, otherwise a seeded uniform sample.
// Simplification: pairwise distance is not binned.
double edge_orientation_entropy(const EdgeSet& edges, const EdgeEntropyOptions& opts = {});

struct OrientationPyramid {
  struct Level {
    std::size_t grid = 1;  // cells per side
    std::vector<std::vector<double>> cells;  // row-major, each holds `bins` weights
  };
  std::size_t bins = 16;
  std::size_t pixel_count = 0;
  std::vector<Level> levels;  // level l has 4^l cells
};

// Magnitude-weighted histograms of signed gradient direction over [0, 2pi)
// for levels 0..levels. Throws ImageTooSmall if either side < 2^levels.
OrientationPyramid build_phog(const GrayImage& gray, std::size_t levels = 3, std::size_t bins = 16);

struct PhogSips {
  double self_similarity = 0.0;
  double complexity = 0.0;
  double anisotropy = 0.0;
  bool degenerate = false;
};

/// Histogram intersection of two L1-normalized histograms.
double histogram_intersection(const std::vector<double>& p, const std::vector<double>& q);

// Self-similarity: median HIK of deepest-level cells against the root.
// Complexity: mean gradient magnitude per pixel.
// Anisotropy: variance of the normalized root histogram.
// Gradient-free pyramids yield zeros with degenerate = true.
PhogSips phog_sips(const OrientationPyramid& pyr);

struct RadialSpectrum {
  std::vector<double> frequencies;  // cycles/image, DC excluded
  std::vector<double> power;        // mean |F|^2 per integer annulus
};

/// Center-square crop, mean removal, 2-D FFT and radial averaging.
RadialSpectrum radial_spectrum(const GrayImage& gray);

struct FourierOptions {
  double fit_lo = 10.0;       // cycles/image
  double fit_hi_frac = 0.5;   // fraction of Nyquist
};

struct FourierSips {
  double slope = 0.0;
  double sigma = 0.0;
};

// Least-squares line through log10(power) vs log10(frequency) over the fit
// range; sigma is the RMS residual. No window is applied.
// Throws ImageTooSmall below a 64x64 crop and DegenerateImage when the fit
// range carries no power.
FourierSips fourier_sips(const GrayImage& gray, const FourierOptions& opts = {});

}  // namespace sipkit
