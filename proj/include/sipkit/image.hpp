#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace sipkit {

// Three-channel image, row-major, channels interleaved per pixel.
// The Tag distinguishes color spaces at compile time.
template <class Tag>
struct Image3 {
  using Pixel = std::array<double, 3>;

  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Pixel> pixels;

  Image3() = default;
  Image3(std::size_t w, std::size_t h, Pixel fill = {0.0, 0.0, 0.0})
      : width(w), height(h), pixels(w * h, fill) {}

  Pixel& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const Pixel& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::size_t size() const { return pixels.size(); }
};

struct RgbTag;
struct HsvTag;
struct LabTag;

/// sRGB image with channels in [0,1].
using RgbImage = Image3<RgbTag>;
/// HSV image; hue normalized to [0,1), saturation and value in [0,1].
using HsvImage = Image3<HsvTag>;
/// CIELAB (D65) image; L in [0,100].
using LabImage = Image3<LabTag>;

/// Single channel linear luminance in [0,1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  std::size_t size() const { return values.size(); }
};

// Decodes PNG or JPEG (detected from the file signature) into an sRGB image.
// Throws Error{IoError} when the file cannot be read and Error{DecodeError} on
// corrupt or unsupported content.
RgbImage load_image(const std::filesystem::path& path);

// 8-bit writers. Values are clamped to [0,1] and rounded to the nearest level.
void save_png(const RgbImage& img, const std::filesystem::path& path);
void save_jpeg(const RgbImage& img, const std::filesystem::path& path, int quality = 95);

// Rounds every channel to the nearest 8-bit level, matching what save_png stores.
RgbImage quantize8(const RgbImage& img);

HsvImage rgb_to_hsv(const RgbImage& img);
RgbImage hsv_to_rgb(const HsvImage& img);
LabImage rgb_to_lab(const RgbImage& img);
GrayImage to_grayscale(const RgbImage& img);

double srgb_to_linear(double c);

/// Bilinear resampling to an explicit size (up or down).
RgbImage resize_bilinear(const RgbImage& img, std::size_t new_width, std::size_t new_height);

struct DisplayLimits {
  std::size_t max_width = 1920;
  std::size_t max_height = 1200;
};

// Scales an image down so it fits the display, keeping the aspect ratio.
// Images that already fit are returned unchanged; never upscales.
RgbImage display_rescale(const RgbImage& img, DisplayLimits limits = {});

// Dimensions display_rescale would produce, without touching pixels.
std::array<std::size_t, 2> display_dimensions(std::size_t width, std::size_t height, DisplayLimits limits = {});

RgbImage flip_horizontal(const RgbImage& img);
RgbImage flip_vertical(const RgbImage& img);

}  // namespace sipkit
