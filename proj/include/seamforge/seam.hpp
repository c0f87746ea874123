#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seamforge/energy.hpp"
#include "seamforge/image.hpp"

namespace seamforge {

// Avidan:     backward energy, plain cumulative minimum.
// Rubinstein: backward energy base plus forward step costs.
// Achanta:    Lab saliency base plus Lab-distance forward step costs.
// Frankovich: absolute energy base plus forward step costs.
enum class SeamMethod { kAvidan, kRubinstein, kAchanta, kFrankovich };

std::string_view to_string(SeamMethod method);
// Accepts the lowercase names used on the command line; throws std::invalid_argument.
SeamMethod parse_seam_method(std::string_view name);
std::span<const SeamMethod> all_seam_methods();

// Vertical seam: one column index per row, top to bottom.
struct Seam {
  std::vector<int> columns;
  friend bool operator==(const Seam&, const Seam&) = default;
};

// Length == height, |s[y] - s[y+1]| <= 1, 0 <= s[y] < width.
bool is_valid_seam(const Seam& seam, int width, int height);

// Per-pixel base cost plus optional forward step costs for one image and method.
struct SeamCosts {
  EnergyMap base;
  std::optional<ForwardCosts> step;
};

// The plane a method's costs are computed from: grayscale for the scalar
// methods, Lab for Achanta. 1-channel input is replicated for Achanta.
Image method_plane(const Image& img, SeamMethod method);
SeamCosts seam_costs_from_plane(const Image& plane, SeamMethod method);
SeamCosts seam_costs(const Image& img, SeamMethod method);

// Base cost of every pixel on the seam plus the step cost of every move.
double path_cost(const SeamCosts& costs, const Seam& seam);

struct CumulativeMatrix {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  // Column offset (-1, 0, +1) of the chosen predecessor in the row above.
  std::vector<std::int8_t> predecessor;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Row-by-row DP. Out-of-range predecessors are excluded; ties pick the
// leftmost candidate. Throws std::invalid_argument when width < 3.
CumulativeMatrix cumulative_matrix(const SeamCosts& costs);
CumulativeMatrix cumulative_matrix(const Image& img, SeamMethod method);

// Leftmost minimum of the last row, then follow stored predecessors upward.
Seam backtrack_optimal_seam(const CumulativeMatrix& m);

Seam find_optimal_seam(const Image& img, SeamMethod method);

// Drops the seam pixel from every row. Throws std::out_of_range on a bad seam.
Image remove_seam(const Image& img, const Seam& seam);

// Adds, right of each seam pixel, the rounded mean of that pixel and its
// right neighbour (the pixel itself at the right edge).
Image insert_seam(const Image& img, const Seam& seam);

enum class RetargetMode { kRemove, kInsert };
enum class Axis { kVertical, kHorizontal };

std::string_view to_string(RetargetMode mode);
std::string_view to_string(Axis axis);
RetargetMode parse_retarget_mode(std::string_view name);
Axis parse_axis(std::string_view name);

struct RetargetOptions {
  SeamMethod method = SeamMethod::kAvidan;
  double ratio = 0.1;
  RetargetMode mode = RetargetMode::kRemove;
  Axis axis = Axis::kVertical;
};

struct RetargetResult {
  Image image;
  // Each seam as computed, valid for the working width at its step. For the
  // horizontal axis these live in the transposed frame.
  std::vector<Seam> seams;
  // The same seams mapped onto the columns of the (possibly transposed) source.
  std::vector<Seam> source_seams;
};

// round(ratio * extent).
int seam_count(double ratio, int extent);

// Throws std::invalid_argument when the seam count is 0 or >= extent - 2.
RetargetResult retarget(const Image& img, const RetargetOptions& options);

// Removed and inserted variants for several ratios, all cut from one shared
// seam sequence. Identical to calling retarget per (ratio, mode).
struct RetargetPair {
  double ratio = 0.0;
  Image removed;
  Image inserted;
};
std::vector<RetargetPair> retarget_both(const Image& img, SeamMethod method,
                                        std::span<const double> ratios,
                                        Axis axis = Axis::kVertical);

// RGB copy of the source with every source-frame seam pixel painted red.
Image draw_seams(const Image& source, std::span<const Seam> source_seams, Axis axis);

}  // namespace seamforge
