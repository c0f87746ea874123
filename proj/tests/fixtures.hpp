#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "seamforge/image_io.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "seamforge_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// n random PNG sources named img00.png, img01.png, ...
inline std::vector<std::string> write_sources(const fs::path& dir, int n, int w, int h,
                                              std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    const std::string id = "img" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    seamforge::write_image(dir / (id + ".png"), oracle::random_image(rng, w, h, 3));
    ids.push_back(id);
  }
  return ids;
}

inline std::set<fs::path> files_under(const fs::path& dir, const std::string& ext) {
  std::set<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.insert(fs::relative(e.path(), dir));
  }
  return out;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace fixtures
