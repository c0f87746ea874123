#include "seamforge/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace seamforge {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 1) {
    throw std::invalid_argument("Image: invalid dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 0 || height < 0 || channels < 1) {
    throw std::invalid_argument("Image: invalid dimensions");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("Image: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height) + "x" + std::to_string(channels));
  }
}

double Image::clamped(int x, int y, int c) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y, c);
}

namespace {

void require_channels(const Image& img, int channels, const char* op) {
  if (img.channels() != channels) {
    throw std::invalid_argument(std::string(op) + ": expected " + std::to_string(channels) +
                                "-channel image, got " + std::to_string(img.channels()));
  }
}

double clamp_u8(double v) { return std::clamp(std::round(v), 0.0, 255.0); }

// sRGB transfer function on [0,1].
double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}
double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Linear sRGB -> XYZ (D65).
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

Mat3 inverse(const Mat3& m) {
  Mat3 inv{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int r1 = (c + 1) % 3, r2 = (c + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
      inv[r][c] = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    }
  }
  const double det = m[0][0] * inv[0][0] + m[0][1] * inv[1][0] + m[0][2] * inv[2][0];
  for (auto& row : inv) {
    for (double& v : row) v /= det;
  }
  return inv;
}

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}
double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

Image to_grayscale(const Image& rgb) {
  require_channels(rgb, 3, "to_grayscale");
  Image out(rgb.width(), rgb.height(), 1);
  auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = clamp_u8(0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2]);
  }
  return out;
}

Image gray_to_rgb(const Image& gray) {
  require_channels(gray, 1, "gray_to_rgb");
  Image out(gray.width(), gray.height(), 3);
  auto src = gray.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  }
  return out;
}

Image to_lab(const Image& rgb) {
  require_channels(rgb, 3, "to_lab");
  Image out(rgb.width(), rgb.height(), 3);
  auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double r = srgb_to_linear(src[i] / 255.0);
    const double g = srgb_to_linear(src[i + 1] / 255.0);
    const double b = srgb_to_linear(src[i + 2] / 255.0);
    const auto& m = kRgbToXyz;
    const double x = m[0][0] * r + m[0][1] * g + m[0][2] * b;
    const double y = m[1][0] * r + m[1][1] * g + m[1][2] * b;
    const double z = m[2][0] * r + m[2][1] * g + m[2][2] * b;
    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    dst[i] = 116.0 * fy - 16.0;
    dst[i + 1] = 500.0 * (fx - fy);
    dst[i + 2] = 200.0 * (fy - fz);
  }
  return out;
}

Image lab_to_rgb(const Image& lab) {
  require_channels(lab, 3, "lab_to_rgb");
  static const Mat3 m = inverse(kRgbToXyz);
  Image out(lab.width(), lab.height(), 3);
  auto src = lab.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double fy = (src[i] + 16.0) / 116.0;
    const double fx = fy + src[i + 1] / 500.0;
    const double fz = fy - src[i + 2] / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * lab_f_inv(fy);
    const double z = kWhiteZ * lab_f_inv(fz);
    const double r = m[0][0] * x + m[0][1] * y + m[0][2] * z;
    const double g = m[1][0] * x + m[1][1] * y + m[1][2] * z;
    const double b = m[2][0] * x + m[2][1] * y + m[2][2] * z;
    dst[i] = 255.0 * linear_to_srgb(r);
    dst[i + 1] = 255.0 * linear_to_srgb(g);
    dst[i + 2] = 255.0 * linear_to_srgb(b);
  }
  return out;
}

namespace {

std::vector<double> gaussian_taps_5() {
  std::vector<double> taps(5);
  double sum = 0.0;
  for (int k = -2; k <= 2; ++k) {
    taps[k + 2] = std::exp(-0.5 * k * k);
    sum += taps[k + 2];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

}  // namespace

std::vector<double> gaussian_kernel_5x5() {
  const auto taps = gaussian_taps_5();
  std::vector<double> kernel(25);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) kernel[y * 5 + x] = taps[y] * taps[x];
  }
  return kernel;
}

Image gaussian_blur_5x5(const Image& img) {
  // Separable: horizontal pass then vertical pass, both replicate-padded.
  const auto taps = gaussian_taps_5();
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  Image tmp(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * img.clamped(x + k, y, c);
        tmp.at(x, y, c) = acc;
      }
    }
  }
  Image out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * tmp.clamped(x, y + k, c);
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

Image transpose_image(const Image& img) {
  Image out(img.height(), img.width(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(x, y, c);
    }
  }
  return out;
}

std::vector<double> awgn_field(int width, int height, int channels, double sigma,
                               std::uint64_t seed) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("add_awgn: sigma must be >= 0");
  }
  std::vector<double> noise(static_cast<std::size_t>(width) * height * channels, 0.0);
  if (sigma == 0.0) return noise;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& n : noise) n = dist(rng);
  return noise;
}

Image add_awgn(const Image& img, double sigma, std::uint64_t seed) {
  const auto noise = awgn_field(img.width(), img.height(), img.channels(), sigma, seed);
  Image out = img;
  if (sigma == 0.0) return out;
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp_u8(dst[i] + noise[i]);
  return out;
}

Image crop(const Image& img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 0 || height < 0 || x0 + width > img.width() ||
      y0 + height > img.height()) {
    throw std::invalid_argument("crop: region " + std::to_string(width) + "x" +
                                std::to_string(height) + "+" + std::to_string(x0) + "+" +
                                std::to_string(y0) + " exceeds " + std::to_string(img.width()) +
                                "x" + std::to_string(img.height()));
  }
  Image out(width, height, img.channels());
  const std::size_t span = static_cast<std::size_t>(width) * img.channels();
  for (int y = 0; y < height; ++y) {
    auto src = img.row(y0 + y).subspan(static_cast<std::size_t>(x0) * img.channels(), span);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

Image quantize_u8(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = clamp_u8(v);
  return out;
}

}  // namespace seamforge
