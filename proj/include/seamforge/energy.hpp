#pragma once

#include <vector>

#include "seamforge/image.hpp"

namespace seamforge {

// Non-negative scalar field, one value per pixel, row-major.
struct EnergyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  EnergyMap() = default;
  EnergyMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double clamped(int x, int y) const;
};

// Forward seam-step costs. For a seam reaching (x, y):
//   left  : from (x-1, y-1)
//   up    : from (x,   y-1)
//   right : from (x+1, y-1)
struct ForwardCosts {
  EnergyMap left;
  EnergyMap up;
  EnergyMap right;
};

// |dI/dx| + |dI/dy| with halved central differences, replicate borders.
EnergyMap backward_energy(const Image& gray);

// C_U = |I(x+1,y) - I(x-1,y)|
// C_L = C_U + |I(x,y-1) - I(x-1,y)|
// C_R = C_U + |I(x,y-1) - I(x+1,y)|
ForwardCosts forward_costs(const Image& gray);

// forward_costs with every |a - b| replaced by the Euclidean distance of Lab vectors.
ForwardCosts forward_costs_lab(const Image& lab);

// ||mean Lab - blurred Lab(x,y)||, mean taken over the unblurred image.
EnergyMap saliency_energy(const Image& rgb);
EnergyMap saliency_energy_from_lab(const Image& lab);

// e_g + |e_g(x+1,y) - e_g(x,y)| + |e_g(x,y+1) - e_g(x,y)|, replicate borders.
EnergyMap absolute_energy(const Image& gray);
EnergyMap absolute_energy_from(const EnergyMap& backward);

// Min/max normalization to an 8-bit grayscale image, for debug dumps.
Image energy_to_image(const EnergyMap& energy);

}  // namespace seamforge
