#include "sipkit/sip_structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sipkit/error.hpp"
#include "sipkit/fft.hpp"
#include "sipkit/random.hpp"
#include "sipkit/sip_basic.hpp"

namespace sipkit {

namespace {

constexpr double kPi = std::numbers::pi;

double fold_half_turn(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

// Boundaries of `grid` near-equal cells along an axis of length n.
std::vector<std::size_t> cell_bounds(std::size_t n, std::size_t grid) {
  std::vector<std::size_t> b(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) b[k] = k * n / grid;
  return b;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

GradientField sobel(const GrayImage& gray) {
  const std::size_t w = gray.width, h = gray.height;
  GradientField g{w, h, std::vector<double>(w * h), std::vector<double>(w * h)};
  auto px = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
    x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
    y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
    return gray.values[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  for (std::size_t yy = 0; yy < h; ++yy) {
    const auto y = static_cast<std::ptrdiff_t>(yy);
    for (std::size_t xx = 0; xx < w; ++xx) {
      const auto x = static_cast<std::ptrdiff_t>(xx);
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      g.gx[yy * w + xx] = gx;
      g.gy[yy * w + xx] = gy;
    }
  }
  return g;
}

EdgeSet extract_edges(const GrayImage& gray, std::size_t max_edges) {
  if (gray.width < 3 || gray.height < 3) {
    throw Error(ErrorCode::ImageTooSmall, "edge extraction needs at least 3x3 pixels");
  }
  const auto grad = sobel(gray);
  const std::size_t w = gray.width;
  std::vector<std::size_t> candidates;
  std::vector<double> magnitude(grad.gx.size(), 0.0);
  for (std::size_t y = 1; y + 1 < gray.height; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const std::size_t i = y * w + x;
      magnitude[i] = std::hypot(grad.gx[i], grad.gy[i]);
      if (magnitude[i] > 0.0) candidates.push_back(i);
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::DegenerateImage, "no pixel has a nonzero gradient");
  }
  const std::size_t keep = std::min(max_edges, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (magnitude[a] != magnitude[b]) return magnitude[a] > magnitude[b];
                      return a < b;
                    });
  candidates.resize(keep);
  std::sort(candidates.begin(), candidates.end());

  EdgeSet edges;
  edges.positions.reserve(keep);
  edges.orientations.reserve(keep);
  edges.magnitudes.reserve(keep);
  for (std::size_t i : candidates) {
    edges.positions.push_back({i % w, i / w});
    edges.orientations.push_back(fold_half_turn(std::atan2(grad.gy[i], grad.gx[i])));
    edges.magnitudes.push_back(magnitude[i]);
  }
  return edges;
}

double edge_orientation_entropy(const EdgeSet& edges, const EdgeEntropyOptions& opts) {
  const std::size_t n = edges.size();
  if (n < 2) throw Error(ErrorCode::InsufficientEdges, "need at least two edge elements");
  if (opts.bins == 0) throw Error(ErrorCode::InvalidArgument, "bins must be positive");

  std::vector<double> hist(opts.bins, 0.0);
  const double bin_scale = static_cast<double>(opts.bins) / (kPi / 2.0);
  auto accumulate = [&](std::size_t i, std::size_t j) {
    double d = std::fabs(edges.orientations[i] - edges.orientations[j]);
    d = std::min(d, kPi - d);
    const auto b = std::min(opts.bins - 1, static_cast<std::size_t>(std::max(0.0, d) * bin_scale));
    hist[b] += 1.0;
  };

  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (total_pairs <= static_cast<double>(opts.max_pairs)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) accumulate(i, j);
  } else {
    std::mt19937_64 rng(opts.seed);
    for (std::size_t k = 0; k < opts.max_pairs; ++k) {
      const auto i = static_cast<std::size_t>(bounded(rng, n));
      auto j = static_cast<std::size_t>(bounded(rng, n - 1));
      if (j >= i) ++j;
      accumulate(i, j);
    }
  }
  return shannon_entropy(hist);
}

OrientationPyramid build_phog(const GrayImage& gray, std::size_t levels, std::size_t bins) {
  const std::size_t finest = std::size_t{1} << levels;
  if (gray.width < finest || gray.height < finest) {
    throw Error(ErrorCode::ImageTooSmall, "PHOG needs at least 2^levels pixels per side");
  }
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "bins must be positive");

  const auto grad = sobel(gray);
  const std::size_t w = gray.width, h = gray.height;

  // Accumulate the finest level directly; coarser levels are sums of children
  // because the cell bounds nest exactly.
  const auto xb = cell_bounds(w, finest);
  const auto yb = cell_bounds(h, finest);
  std::vector<std::size_t> cell_x(w), cell_y(h);
  for (std::size_t c = 0; c < finest; ++c) {
    for (std::size_t x = xb[c]; x < xb[c + 1]; ++x) cell_x[x] = c;
    for (std::size_t y = yb[c]; y < yb[c + 1]; ++y) cell_y[y] = c;
  }

  OrientationPyramid pyr;
  pyr.bins = bins;
  pyr.pixel_count = w * h;
  pyr.levels.resize(levels + 1);
  auto& deepest = pyr.levels[levels];
  deepest.grid = finest;
  deepest.cells.assign(finest * finest, std::vector<double>(bins, 0.0));

  const double bin_scale = static_cast<double>(bins) / (2.0 * kPi);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      const double mag = std::hypot(grad.gx[i], grad.gy[i]);
      if (mag == 0.0) continue;
      double angle = std::atan2(grad.gy[i], grad.gx[i]);
      if (angle < 0.0) angle += 2.0 * kPi;
      const auto b = std::min(bins - 1, static_cast<std::size_t>(angle * bin_scale));
      deepest.cells[cell_y[y] * finest + cell_x[x]][b] += mag;
    }
  }

  for (std::size_t l = levels; l-- > 0;) {
    const auto& child = pyr.levels[l + 1];
    auto& level = pyr.levels[l];
    level.grid = std::size_t{1} << l;
    level.cells.assign(level.grid * level.grid, std::vector<double>(bins, 0.0));
    for (std::size_t cy = 0; cy < child.grid; ++cy) {
      for (std::size_t cx = 0; cx < child.grid; ++cx) {
        auto& parent = level.cells[(cy / 2) * level.grid + cx / 2];
        const auto& src = child.cells[cy * child.grid + cx];
        for (std::size_t b = 0; b < bins; ++b) parent[b] += src[b];
      }
    }
  }
  return pyr;
}

double histogram_intersection(const std::vector<double>& p, const std::vector<double>& q) {
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (sp <= 0.0 || sq <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < p.size() && k < q.size(); ++k) s += std::min(p[k] / sp, q[k] / sq);
  return s;
}

PhogSips phog_sips(const OrientationPyramid& pyr) {
  if (pyr.levels.empty() || pyr.pixel_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "empty orientation pyramid");
  }
  const auto& root = pyr.levels.front().cells.front();
  const double mass = std::accumulate(root.begin(), root.end(), 0.0);
  if (mass < 1e-9) return {0.0, 0.0, 0.0, true};

  PhogSips out;
  out.complexity = mass / static_cast<double>(pyr.pixel_count);

  const auto nb = static_cast<double>(root.size());
  double mean = 0.0;
  for (double v : root) mean += v / mass;
  mean /= nb;
  double var = 0.0;
  for (double v : root) var += (v / mass - mean) * (v / mass - mean);
  out.anisotropy = var / nb;

  std::vector<double> hik;
  hik.reserve(pyr.levels.back().cells.size());
  for (const auto& cell : pyr.levels.back().cells) hik.push_back(histogram_intersection(cell, root));
  out.self_similarity = std::clamp(median_of(std::move(hik)), 0.0, 1.0);
  return out;
}

RadialSpectrum radial_spectrum(const GrayImage& gray) {
  const std::size_t s = std::min(gray.width, gray.height);
  const std::size_t x0 = (gray.width - s) / 2;
  const std::size_t y0 = (gray.height - s) / 2;

  std::vector<std::complex<double>> field(s * s);
  double mean = 0.0;
  for (std::size_t y = 0; y < s; ++y)
    for (std::size_t x = 0; x < s; ++x) mean += gray.at(x0 + x, y0 + y);
  mean /= static_cast<double>(s * s);
  double peak = 0.0;
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      const double v = gray.at(x0 + x, y0 + y) - mean;
      field[y * s + x] = v;
      peak = std::max(peak, std::fabs(v));
    }
  }
  // Rounding residue of the mean on flat images is not signal.
  if (peak < 1e-12) std::fill(field.begin(), field.end(), std::complex<double>{});

  const auto spectrum = fft2d(field, s, s);
  const std::size_t nyquist = s / 2;
  std::vector<double> sum(nyquist + 1, 0.0);
  std::vector<std::size_t> count(nyquist + 1, 0);
  const auto signed_freq = [s](std::size_t k) {
    return k <= s / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(s);
  };
  for (std::size_t v = 0; v < s; ++v) {
    const double fv = signed_freq(v);
    for (std::size_t u = 0; u < s; ++u) {
      const double fu = signed_freq(u);
      const auto k = static_cast<std::size_t>(std::floor(std::sqrt(fu * fu + fv * fv) + 0.5));
      if (k == 0 || k > nyquist) continue;
      sum[k] += std::norm(spectrum[v * s + u]);
      ++count[k];
    }
  }
  RadialSpectrum out;
  for (std::size_t k = 1; k <= nyquist; ++k) {
    if (count[k] == 0) continue;
    out.frequencies.push_back(static_cast<double>(k));
    out.power.push_back(sum[k] / static_cast<double>(count[k]));
  }
  return out;
}

FourierSips fourier_sips(const GrayImage& gray, const FourierOptions& opts) {
  const std::size_t s = std::min(gray.width, gray.height);
  if (s < 64) throw Error(ErrorCode::ImageTooSmall, "Fourier SIPs need a 64x64 center crop");

  const auto spec = radial_spectrum(gray);
  const double hi = opts.fit_hi_frac * static_cast<double>(s / 2);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i) {
    const double f = spec.frequencies[i];
    if (f < opts.fit_lo || f > hi) continue;
    if (!(spec.power[i] > 0.0)) continue;
    lx.push_back(std::log10(f));
    ly.push_back(std::log10(spec.power[i]));
  }
  if (lx.size() < 2) throw Error(ErrorCode::DegenerateImage, "no spectral power in the fit range");

  const auto n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  FourierSips out;
  out.slope = sxy / sxx;
  const double intercept = my - out.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + out.slope * lx[i]);
    ss += r * r;
  }
  out.sigma = std::sqrt(ss / n);
  return out;
}

}  // namespace sipkit
