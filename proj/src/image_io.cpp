#include "seamforge/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace seamforge {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

Image from_mat(cv::Mat mat, const std::string& origin) {
  if (mat.depth() != CV_8U) {
    throw std::runtime_error("unsupported bit depth (8-bit only): " + origin);
  }
  if (mat.channels() == 4) {
    cv::Mat bgr;
    std::vector<cv::Mat> planes;
    cv::split(mat, planes);
    planes.pop_back();
    cv::merge(planes, bgr);
    mat = bgr;
  }
  const int ch = mat.channels();
  if (ch != 1 && ch != 3) {
    throw std::runtime_error("unsupported channel count: " + origin);
  }
  Image img(mat.cols, mat.rows, ch);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* src = mat.ptr<unsigned char>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (ch == 1) {
        img.at(x, y) = src[x];
      } else {
        // OpenCV stores BGR.
        img.at(x, y, 0) = src[3 * x + 2];
        img.at(x, y, 1) = src[3 * x + 1];
        img.at(x, y, 2) = src[3 * x];
      }
    }
  }
  return img;
}

cv::Mat to_mat(const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw std::invalid_argument("write_image: only 1- or 3-channel images can be saved");
  }
  const int ch = img.channels();
  cv::Mat mat(img.height(), img.width(), ch == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* dst = mat.ptr<unsigned char>(y);
    for (int x = 0; x < img.width(); ++x) {
      auto u8 = [](double v) {
        return static_cast<unsigned char>(std::clamp(std::round(v), 0.0, 255.0));
      };
      if (ch == 1) {
        dst[x] = u8(img.at(x, y));
      } else {
        dst[3 * x] = u8(img.at(x, y, 2));
        dst[3 * x + 1] = u8(img.at(x, y, 1));
        dst[3 * x + 2] = u8(img.at(x, y, 0));
      }
    }
  }
  return mat;
}

std::vector<int> jpeg_params(int quality) {
  if (quality < 1 || quality > 100) {
    throw std::invalid_argument("JPEG quality must be in 1..100, got " + std::to_string(quality));
  }
  return {cv::IMWRITE_JPEG_QUALITY, quality};
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_ANYCOLOR);
  if (mat.empty()) {
    throw std::runtime_error("cannot read image: " + path.string());
  }
  return from_mat(std::move(mat), path.string());
}

void write_image(const std::filesystem::path& path, const Image& img,
                 const WriteOptions& options) {
  const std::string ext = lower_extension(path);
  std::vector<int> params;
  if (ext == ".jpg" || ext == ".jpeg") {
    params = jpeg_params(options.jpeg_quality);
  } else if (ext != ".png" && ext != ".bmp") {
    throw std::invalid_argument("write_image: unsupported extension '" + ext + "'");
  }
  const cv::Mat mat = to_mat(img);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat, params)) {
    throw std::runtime_error("cannot write image: " + path.string());
  }
}

Image jpeg_roundtrip(const Image& img, int quality) {
  std::vector<unsigned char> buffer;
  if (!cv::imencode(".jpg", to_mat(img), buffer, jpeg_params(quality))) {
    throw std::runtime_error("JPEG encoding failed");
  }
  return from_mat(cv::imdecode(buffer, cv::IMREAD_ANYCOLOR), "<memory>");
}

ImageShape probe_image(const std::filesystem::path& path) {
  const Image img = read_image(path);
  return {img.width(), img.height(), img.channels()};
}

}  // namespace seamforge
