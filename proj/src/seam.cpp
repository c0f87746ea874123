#include "seamforge/seam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace seamforge {

namespace {

constexpr std::array<SeamMethod, 4> kAllMethods = {
    SeamMethod::kAvidan, SeamMethod::kRubinstein, SeamMethod::kAchanta, SeamMethod::kFrankovich};

void check_seam_bounds(const Seam& seam, int width, int height, const char* op) {
  if (static_cast<int>(seam.columns.size()) != height) {
    throw std::out_of_range(std::string(op) + ": seam length " +
                            std::to_string(seam.columns.size()) + " != image height " +
                            std::to_string(height));
  }
  for (int y = 0; y < height; ++y) {
    const int x = seam.columns[y];
    if (x < 0 || x >= width) {
      throw std::out_of_range(std::string(op) + ": seam column " + std::to_string(x) +
                              " at row " + std::to_string(y) + " outside width " +
                              std::to_string(width));
    }
  }
}

// Step cost for arriving at (x, y) from column x + offset of the row above.
double step_cost(const SeamCosts& costs, int x, int y, int offset) {
  if (!costs.step) return 0.0;
  switch (offset) {
    case -1: return costs.step->left.at(x, y);
    case 0: return costs.step->up.at(x, y);
    default: return costs.step->right.at(x, y);
  }
}

}  // namespace

std::string_view to_string(SeamMethod method) {
  switch (method) {
    case SeamMethod::kAvidan: return "avidan";
    case SeamMethod::kRubinstein: return "rubinstein";
    case SeamMethod::kAchanta: return "achanta";
    case SeamMethod::kFrankovich: return "frankovich";
  }
  return "unknown";
}

SeamMethod parse_seam_method(std::string_view name) {
  for (SeamMethod m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown seam method '" + std::string(name) + "'");
}

std::span<const SeamMethod> all_seam_methods() { return kAllMethods; }

bool is_valid_seam(const Seam& seam, int width, int height) {
  if (static_cast<int>(seam.columns.size()) != height) return false;
  for (int y = 0; y < height; ++y) {
    const int x = seam.columns[y];
    if (x < 0 || x >= width) return false;
    if (y > 0 && std::abs(x - seam.columns[y - 1]) > 1) return false;
  }
  return true;
}

Image method_plane(const Image& img, SeamMethod method) {
  if (method == SeamMethod::kAchanta) {
    return to_lab(img.channels() == 1 ? gray_to_rgb(img) : img);
  }
  return img.channels() == 3 ? to_grayscale(img) : img;
}

SeamCosts seam_costs_from_plane(const Image& plane, SeamMethod method) {
  switch (method) {
    case SeamMethod::kAvidan:
      return {backward_energy(plane), std::nullopt};
    case SeamMethod::kRubinstein:
      return {backward_energy(plane), forward_costs(plane)};
    case SeamMethod::kAchanta:
      return {saliency_energy_from_lab(plane), forward_costs_lab(plane)};
    case SeamMethod::kFrankovich:
      return {absolute_energy(plane), forward_costs(plane)};
  }
  throw std::invalid_argument("seam_costs: unknown method");
}

SeamCosts seam_costs(const Image& img, SeamMethod method) {
  return seam_costs_from_plane(method_plane(img, method), method);
}

double path_cost(const SeamCosts& costs, const Seam& seam) {
  check_seam_bounds(seam, costs.base.width, costs.base.height, "path_cost");
  double total = 0.0;
  for (int y = 0; y < costs.base.height; ++y) {
    const int x = seam.columns[y];
    total += costs.base.at(x, y);
    if (y > 0) total += step_cost(costs, x, y, seam.columns[y - 1] - x);
  }
  return total;
}

CumulativeMatrix cumulative_matrix(const SeamCosts& costs) {
  const int w = costs.base.width;
  const int h = costs.base.height;
  if (w < 3) {
    throw std::invalid_argument("cumulative_matrix: width must be >= 3, got " +
                                std::to_string(w));
  }
  CumulativeMatrix m;
  m.width = w;
  m.height = h;
  m.values.resize(static_cast<std::size_t>(w) * h);
  m.predecessor.assign(static_cast<std::size_t>(w) * h, 0);

  for (int x = 0; x < w; ++x) m.values[x] = costs.base.at(x, 0);

  for (int y = 1; y < h; ++y) {
    const double* above = m.values.data() + static_cast<std::size_t>(y - 1) * w;
    double* here = m.values.data() + static_cast<std::size_t>(y) * w;
    std::int8_t* pred = m.predecessor.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      std::int8_t best_offset = 0;
      for (int offset = -1; offset <= 1; ++offset) {
        const int px = x + offset;
        if (px < 0 || px >= w) continue;
        const double candidate = above[px] + step_cost(costs, x, y, offset);
        if (candidate < best) {
          best = candidate;
          best_offset = static_cast<std::int8_t>(offset);
        }
      }
      here[x] = costs.base.at(x, y) + best;
      pred[x] = best_offset;
    }
  }
  return m;
}

CumulativeMatrix cumulative_matrix(const Image& img, SeamMethod method) {
  if (img.width() < 3) {
    throw std::invalid_argument("cumulative_matrix: width must be >= 3, got " +
                                std::to_string(img.width()));
  }
  return cumulative_matrix(seam_costs(img, method));
}

Seam backtrack_optimal_seam(const CumulativeMatrix& m) {
  Seam seam;
  if (m.height == 0 || m.width == 0) return seam;
  seam.columns.resize(m.height);
  const auto last = m.values.begin() + static_cast<std::ptrdiff_t>(m.height - 1) * m.width;
  int x = static_cast<int>(std::min_element(last, last + m.width) - last);
  for (int y = m.height - 1; y >= 0; --y) {
    seam.columns[y] = x;
    x += m.predecessor[static_cast<std::size_t>(y) * m.width + x];
  }
  return seam;
}

Seam find_optimal_seam(const Image& img, SeamMethod method) {
  return backtrack_optimal_seam(cumulative_matrix(img, method));
}

Image remove_seam(const Image& img, const Seam& seam) {
  check_seam_bounds(seam, img.width(), img.height(), "remove_seam");
  const int ch = img.channels();
  Image out(img.width() - 1, img.height(), ch);
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    const std::size_t cut = static_cast<std::size_t>(seam.columns[y]) * ch;
    std::copy(src.begin(), src.begin() + cut, dst.begin());
    std::copy(src.begin() + cut + ch, src.end(), dst.begin() + cut);
  }
  return out;
}

Image insert_seam(const Image& img, const Seam& seam) {
  check_seam_bounds(seam, img.width(), img.height(), "insert_seam");
  const int ch = img.channels();
  Image out(img.width() + 1, img.height(), ch);
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    const int s = seam.columns[y];
    const std::size_t keep = static_cast<std::size_t>(s + 1) * ch;
    std::copy(src.begin(), src.begin() + keep, dst.begin());
    const int right = std::min(s + 1, img.width() - 1);
    for (int c = 0; c < ch; ++c) {
      dst[keep + c] = std::round((img.at(s, y, c) + img.at(right, y, c)) / 2.0);
    }
    std::copy(src.begin() + keep, src.end(), dst.begin() + keep + ch);
  }
  return out;
}

std::string_view to_string(RetargetMode mode) {
  return mode == RetargetMode::kRemove ? "remove" : "insert";
}

std::string_view to_string(Axis axis) {
  return axis == Axis::kVertical ? "vertical" : "horizontal";
}

RetargetMode parse_retarget_mode(std::string_view name) {
  if (name == "remove") return RetargetMode::kRemove;
  if (name == "insert") return RetargetMode::kInsert;
  throw std::invalid_argument("unknown retarget mode '" + std::string(name) + "'");
}

Axis parse_axis(std::string_view name) {
  if (name == "vertical") return Axis::kVertical;
  if (name == "horizontal") return Axis::kHorizontal;
  throw std::invalid_argument("unknown axis '" + std::string(name) + "'");
}

int seam_count(double ratio, int extent) {
  return static_cast<int>(std::llround(ratio * extent));
}

namespace {

struct SeamSequence {
  std::vector<Seam> seams;
  std::vector<Seam> source_seams;
  Image carved;
};

// k successive optimal-seam removals. The cost plane is carried alongside the
// image since grayscale and Lab are per-pixel maps and commute with removal.
SeamSequence carve(const Image& img, SeamMethod method, int count,
                   const std::function<void(int, const Image&)>& on_step = {}) {
  SeamSequence out;
  out.carved = img;
  Image plane = method_plane(img, method);

  // Source column of every surviving pixel, per row.
  std::vector<std::vector<int>> source_index(img.height());
  for (auto& row : source_index) {
    row.resize(img.width());
    for (int x = 0; x < img.width(); ++x) row[x] = x;
  }

  out.seams.reserve(count);
  out.source_seams.reserve(count);
  for (int step = 0; step < count; ++step) {
    Seam seam = backtrack_optimal_seam(cumulative_matrix(seam_costs_from_plane(plane, method)));
    Seam source;
    source.columns.resize(img.height());
    for (int y = 0; y < img.height(); ++y) {
      auto& row = source_index[y];
      source.columns[y] = row[seam.columns[y]];
      row.erase(row.begin() + seam.columns[y]);
    }
    out.carved = remove_seam(out.carved, seam);
    plane = remove_seam(plane, seam);
    out.seams.push_back(std::move(seam));
    out.source_seams.push_back(std::move(source));
    if (on_step) on_step(step + 1, out.carved);
  }
  return out;
}

// Duplicates the source-frame seams in order, shifting each one right by the
// number of earlier insertions that landed left of it in the same row.
Image duplicate_seams(const Image& img, const std::vector<Seam>& source_seams) {
  Image out = img;
  for (std::size_t t = 0; t < source_seams.size(); ++t) {
    Seam shifted = source_seams[t];
    for (int y = 0; y < img.height(); ++y) {
      int shift = 0;
      for (std::size_t u = 0; u < t; ++u) {
        if (source_seams[u].columns[y] < source_seams[t].columns[y]) ++shift;
      }
      shifted.columns[y] += shift;
    }
    out = insert_seam(out, shifted);
  }
  return out;
}

int checked_seam_count(double ratio, int width) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("retarget: ratio must be > 0");
  }
  const int count = seam_count(ratio, width);
  if (count < 1) {
    throw std::invalid_argument("retarget: ratio yields zero seams");
  }
  if (count >= width - 2) {
    throw std::invalid_argument("retarget: " + std::to_string(count) +
                                " seams leave fewer than 3 columns of " +
                                std::to_string(width));
  }
  return count;
}

}  // namespace

RetargetResult retarget(const Image& img, const RetargetOptions& options) {
  const bool horizontal = options.axis == Axis::kHorizontal;
  const Image work = horizontal ? transpose_image(img) : img;
  const int count = checked_seam_count(options.ratio, work.width());

  SeamSequence sequence = carve(work, options.method, count);
  RetargetResult result;
  if (options.mode == RetargetMode::kRemove) {
    result.image = std::move(sequence.carved);
  } else {
    result.image = duplicate_seams(work, sequence.source_seams);
  }
  if (horizontal) result.image = transpose_image(result.image);
  result.seams = std::move(sequence.seams);
  result.source_seams = std::move(sequence.source_seams);
  return result;
}

std::vector<RetargetPair> retarget_both(const Image& img, SeamMethod method,
                                        std::span<const double> ratios, Axis axis) {
  const bool horizontal = axis == Axis::kHorizontal;
  const Image work = horizontal ? transpose_image(img) : img;
  std::vector<int> counts;
  int max_count = 0;
  for (double ratio : ratios) {
    counts.push_back(checked_seam_count(ratio, work.width()));
    max_count = std::max(max_count, counts.back());
  }

  std::vector<RetargetPair> pairs(ratios.size());
  auto orient = [&](Image im) { return horizontal ? transpose_image(im) : im; };
  const SeamSequence sequence = carve(work, method, max_count, [&](int step, const Image& carved) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == step) pairs[i].removed = orient(carved);
    }
  });
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pairs[i].ratio = ratios[i];
    const std::vector<Seam> prefix(sequence.source_seams.begin(),
                                   sequence.source_seams.begin() + counts[i]);
    pairs[i].inserted = orient(duplicate_seams(work, prefix));
  }
  return pairs;
}

Image draw_seams(const Image& source, std::span<const Seam> source_seams, Axis axis) {
  Image canvas = source.channels() == 1 ? gray_to_rgb(source) : source;
  for (const Seam& seam : source_seams) {
    for (std::size_t r = 0; r < seam.columns.size(); ++r) {
      const int x = axis == Axis::kVertical ? seam.columns[r] : static_cast<int>(r);
      const int y = axis == Axis::kVertical ? static_cast<int>(r) : seam.columns[r];
      if (x < 0 || y < 0 || x >= canvas.width() || y >= canvas.height()) continue;
      canvas.at(x, y, 0) = 255.0;
      canvas.at(x, y, 1) = 0.0;
      canvas.at(x, y, 2) = 0.0;
    }
  }
  return canvas;
}

}  // namespace seamforge
