#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seamforge {

// Dense W x H x C pixel grid, channels interleaved, stored as doubles.
// RGB data lives on the 0-255 scale; Lab planes use CIE units.
// Coordinates are (x, y) = (column, row).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  // Replicate-border access: coordinates are clamped into the grid.
  double clamped(int x, int y, int c = 0) const;

  std::span<double> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const double> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// BT.601 luma, rounded and clamped to [0,255]. Requires 3 channels.
Image to_grayscale(const Image& rgb);

// Replicates a 1-channel image into 3 identical channels.
Image gray_to_rgb(const Image& gray);

// sRGB (0-255) -> CIE Lab, D65 white point.
Image to_lab(const Image& rgb);
// Inverse of to_lab; output is unrounded sRGB on the 0-255 scale.
Image lab_to_rgb(const Image& lab);

// Normalized 5x5 Gaussian kernel (sigma = 1), row-major.
std::vector<double> gaussian_kernel_5x5();

// Per-channel 5x5 Gaussian blur with replicate padding.
Image gaussian_blur_5x5(const Image& img);

Image transpose_image(const Image& img);

// The raw N(0, sigma^2) samples add_awgn adds for this (shape, sigma, seed).
std::vector<double> awgn_field(int width, int height, int channels, double sigma,
                               std::uint64_t seed);

// p -> clamp(round(p + n), 0, 255), n ~ N(0, sigma^2) on the 0-255 scale.
Image add_awgn(const Image& img, double sigma, std::uint64_t seed);

// Row-major W x H crop anchored at (x0, y0).
Image crop(const Image& img, int x0, int y0, int width, int height);

// Rounds and clamps every sample to [0,255].
Image quantize_u8(const Image& img);

}  // namespace seamforge
