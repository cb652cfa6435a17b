#include "sipkit/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include "sipkit/error.hpp"

namespace sipkit {

namespace {

enum class FileKind { Png, Jpeg, Unknown };

FileKind sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), sizeof(sig));
  const auto got = in.gcount();
  if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return FileKind::Png;
  if (got >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return FileKind::Jpeg;
  return FileKind::Unknown;
}

RgbImage from_bytes(const unsigned char* data, std::size_t w, std::size_t h) {
  RgbImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    img.pixels[i] = {data[3 * i] / 255.0, data[3 * i + 1] / 255.0, data[3 * i + 2] / 255.0};
  }
  return img;
}

std::vector<unsigned char> to_bytes(const RgbImage& img) {
  std::vector<unsigned char> out(img.size() * 3);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(img.pixels[i][c], 0.0, 1.0);
      out[3 * i + c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  return out;
}

RgbImage decode_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  if (image.width == 0 || image.height == 0) {
    throw Error(ErrorCode::DecodeError, path.string() + ": empty image");
  }
  return from_bytes(buffer.data(), image.width, image.height);
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RgbImage decode_jpeg(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  // Declared before setjmp so no destructors are skipped by longjmp.
  std::vector<unsigned char> buffer;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  buffer.resize(w * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_bytes(buffer.data(), w, h);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double sample_axis(std::size_t out_index, std::size_t in_size, std::size_t out_size) {
  const double s = (static_cast<double>(out_index) + 0.5) * static_cast<double>(in_size) /
                       static_cast<double>(out_size) -
                   0.5;
  return std::clamp(s, 0.0, static_cast<double>(in_size - 1));
}

std::size_t round_half_up(double v) { return static_cast<std::size_t>(std::floor(v + 0.5)); }

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "no such file " + path.string());
  }
  switch (sniff(path)) {
    case FileKind::Png: return decode_png(path);
    case FileKind::Jpeg: return decode_jpeg(path);
    case FileKind::Unknown: break;
  }
  throw Error(ErrorCode::DecodeError, path.string() + ": not a PNG or JPEG file");
}

void save_png(const RgbImage& img, const std::filesystem::path& path) {
  auto bytes = to_bytes(img);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
  }
}

void save_jpeg(const RgbImage& img, const std::filesystem::path& path, int quality) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  auto bytes = to_bytes(img);

  jpeg_compress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    throw Error(ErrorCode::IoError, path.string() + ": " + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = bytes.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

RgbImage quantize8(const RgbImage& img) {
  RgbImage out = img;
  for (auto& px : out.pixels) {
    for (auto& c : px) c = static_cast<double>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)) / 255.0;
  }
  return out;
}

HsvImage rgb_to_hsv(const RgbImage& img) {
  HsvImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto [r, g, b] = img.pixels[i];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double chroma = mx - mn;
    double h = 0.0;
    if (chroma > 0.0) {
      if (mx == r) {
        h = (g - b) / chroma;
        if (h < 0.0) h += 6.0;
      } else if (mx == g) {
        h = (b - r) / chroma + 2.0;
      } else {
        h = (r - g) / chroma + 4.0;
      }
      h /= 6.0;
      if (h >= 1.0) h -= 1.0;
    }
    const double s = mx > 0.0 ? chroma / mx : 0.0;
    out.pixels[i] = {h, s, mx};
  }
  return out;
}

RgbImage hsv_to_rgb(const HsvImage& img) {
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto [h, s, v] = img.pixels[i];
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(std::floor(hp)) % 6) {
      case 0: r = c, g = x; break;
      case 1: r = x, g = c; break;
      case 2: g = c, b = x; break;
      case 3: g = x, b = c; break;
      case 4: r = x, b = c; break;
      default: r = c, b = x; break;
    }
    const double m = v - c;
    out.pixels[i] = {r + m, g + m, b + m};
  }
  return out;
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

LabImage rgb_to_lab(const RgbImage& img) {
  // D65 reference white.
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
  LabImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double r = srgb_to_linear(img.pixels[i][0]);
    const double g = srgb_to_linear(img.pixels[i][1]);
    const double b = srgb_to_linear(img.pixels[i][2]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
    const double l = std::clamp(116.0 * fy - 16.0, 0.0, 100.0);
    out.pixels[i] = {l, 500.0 * (fx - fy), 200.0 * (fy - fz)};
  }
  return out;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto& p = img.pixels[i];
    const double y = 0.2126 * srgb_to_linear(p[0]) + 0.7152 * srgb_to_linear(p[1]) +
                     0.0722 * srgb_to_linear(p[2]);
    out.values[i] = std::clamp(y, 0.0, 1.0);
  }
  return out;
}

RgbImage resize_bilinear(const RgbImage& img, std::size_t new_width, std::size_t new_height) {
  if (new_width == img.width && new_height == img.height) return img;
  RgbImage out(new_width, new_height);
  std::vector<std::size_t> x0(new_width), x1(new_width);
  std::vector<double> tx(new_width);
  for (std::size_t x = 0; x < new_width; ++x) {
    const double sx = sample_axis(x, img.width, new_width);
    x0[x] = static_cast<std::size_t>(sx);
    x1[x] = std::min(x0[x] + 1, img.width - 1);
    tx[x] = sx - static_cast<double>(x0[x]);
  }
  for (std::size_t y = 0; y < new_height; ++y) {
    const double sy = sample_axis(y, img.height, new_height);
    const auto y0 = static_cast<std::size_t>(sy);
    const auto y1 = std::min(y0 + 1, img.height - 1);
    const double ty = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < new_width; ++x) {
      const auto& a = img.at(x0[x], y0);
      const auto& b = img.at(x1[x], y0);
      const auto& c = img.at(x0[x], y1);
      const auto& d = img.at(x1[x], y1);
      auto& o = out.at(x, y);
      for (int k = 0; k < 3; ++k) {
        const double top = a[k] + (b[k] - a[k]) * tx[x];
        const double bottom = c[k] + (d[k] - c[k]) * tx[x];
        o[k] = top + (bottom - top) * ty;
      }
    }
  }
  return out;
}

std::array<std::size_t, 2> display_dimensions(std::size_t width, std::size_t height, DisplayLimits limits) {
  if (width <= limits.max_width && height <= limits.max_height) return {width, height};
  const double fw = static_cast<double>(limits.max_width) / static_cast<double>(width);
  const double fh = static_cast<double>(limits.max_height) / static_cast<double>(height);
  std::size_t w = 0, h = 0;
  if (fw <= fh) {
    w = limits.max_width;
    h = round_half_up(static_cast<double>(height) * fw);
  } else {
    h = limits.max_height;
    w = round_half_up(static_cast<double>(width) * fh);
  }
  return {std::clamp<std::size_t>(w, 1, limits.max_width), std::clamp<std::size_t>(h, 1, limits.max_height)};
}

RgbImage display_rescale(const RgbImage& img, DisplayLimits limits) {
  const auto [w, h] = display_dimensions(img.width, img.height, limits);
  return resize_bilinear(img, w, h);
}

RgbImage flip_horizontal(const RgbImage& img) {
  RgbImage out(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
  return out;
}

RgbImage flip_vertical(const RgbImage& img) {
  RgbImage out(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) out.at(x, y) = img.at(x, img.height - 1 - y);
  return out;
}

}  // namespace sipkit
