#include "seamforge/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seamforge {

namespace {

void require_channels(const Image& img, int channels, const char* op) {
  if (img.channels() != channels) {
    throw std::invalid_argument(std::string(op) + ": expected " + std::to_string(channels) +
                                "-channel image, got " + std::to_string(img.channels()));
  }
}

// Distance between two replicate-clamped pixels, scalar or vector.
template <int Channels>
double pixel_distance(const Image& img, int x0, int y0, int x1, int y1) {
  if constexpr (Channels == 1) {
    return std::abs(img.clamped(x0, y0) - img.clamped(x1, y1));
  } else {
    double sq = 0.0;
    for (int c = 0; c < Channels; ++c) {
      const double d = img.clamped(x0, y0, c) - img.clamped(x1, y1, c);
      sq += d * d;
    }
    return std::sqrt(sq);
  }
}

template <int Channels>
ForwardCosts forward_costs_impl(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  ForwardCosts costs{EnergyMap(w, h), EnergyMap(w, h), EnergyMap(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double up = pixel_distance<Channels>(img, x + 1, y, x - 1, y);
      costs.up.at(x, y) = up;
      costs.left.at(x, y) = up + pixel_distance<Channels>(img, x, y - 1, x - 1, y);
      costs.right.at(x, y) = up + pixel_distance<Channels>(img, x, y - 1, x + 1, y);
    }
  }
  return costs;
}

}  // namespace

double EnergyMap::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
}

EnergyMap backward_energy(const Image& gray) {
  require_channels(gray, 1, "backward_energy");
  const int w = gray.width();
  const int h = gray.height();
  EnergyMap e(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = gray.clamped(x + 1, y) - gray.clamped(x - 1, y);
      const double dy = gray.clamped(x, y + 1) - gray.clamped(x, y - 1);
      e.at(x, y) = std::abs(dx) / 2.0 + std::abs(dy) / 2.0;
    }
  }
  return e;
}

ForwardCosts forward_costs(const Image& gray) {
  require_channels(gray, 1, "forward_costs");
  return forward_costs_impl<1>(gray);
}

ForwardCosts forward_costs_lab(const Image& lab) {
  require_channels(lab, 3, "forward_costs_lab");
  return forward_costs_impl<3>(lab);
}

EnergyMap saliency_energy(const Image& rgb) {
  require_channels(rgb, 3, "saliency_energy");
  return saliency_energy_from_lab(to_lab(rgb));
}

EnergyMap saliency_energy_from_lab(const Image& lab) {
  require_channels(lab, 3, "saliency_energy_from_lab");
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  const auto data = lab.data();
  for (std::size_t i = 0; i < data.size(); i += 3) {
    for (int c = 0; c < 3; ++c) mean[c] += data[i + c];
  }
  const double n = static_cast<double>(lab.width()) * lab.height();
  for (double& m : mean) m /= n;

  const Image blurred = gaussian_blur_5x5(lab);
  EnergyMap e(lab.width(), lab.height());
  for (int y = 0; y < lab.height(); ++y) {
    for (int x = 0; x < lab.width(); ++x) {
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = mean[c] - blurred.at(x, y, c);
        sq += d * d;
      }
      e.at(x, y) = std::sqrt(sq);
    }
  }
  return e;
}

EnergyMap absolute_energy_from(const EnergyMap& eg) {
  EnergyMap ea(eg.width, eg.height);
  for (int y = 0; y < eg.height; ++y) {
    for (int x = 0; x < eg.width; ++x) {
      const double here = eg.at(x, y);
      ea.at(x, y) = here + std::abs(eg.clamped(x + 1, y) - here) +
                    std::abs(eg.clamped(x, y + 1) - here);
    }
  }
  return ea;
}

EnergyMap absolute_energy(const Image& gray) {
  require_channels(gray, 1, "absolute_energy");
  return absolute_energy_from(backward_energy(gray));
}

Image energy_to_image(const EnergyMap& energy) {
  Image out(energy.width, energy.height, 1);
  if (energy.values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(energy.values.begin(), energy.values.end());
  const double range = *hi - *lo;
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = range > 0.0 ? std::round(255.0 * (energy.values[i] - *lo) / range) : 0.0;
  }
  return out;
}

}  // namespace seamforge
