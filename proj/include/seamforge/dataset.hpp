#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seamforge/image.hpp"
#include "seamforge/seam.hpp"

namespace seamforge {

namespace fs = std::filesystem;

enum class SampleClass : int { kOriginal = 0, kInserted = 1, kRemoved = 2 };

// Everything needed to regenerate a corpus bit-for-bit.
struct CorpusSpec {
  fs::path source_dir;
  fs::path output_dir;
  int width = 512;
  int height = 384;
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<SeamMethod> methods{SeamMethod::kAvidan};
  std::string format = "jpeg";  // jpeg | png | bmp
  int quality = 100;
  std::array<double, 3> splits{0.8, 0.1, 0.1};  // train : val : test
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency

  // Robustness sets.
  std::vector<double> unseen_ratios{0.04, 0.06, 0.08};
  std::vector<double> awgn_sigmas{0.1, 0.2, 0.3, 0.4, 0.5};
};

// Throws std::invalid_argument on inconsistent fields.
void validate(const CorpusSpec& spec);

// Unknown keys are rejected so typos do not silently fall back to defaults.
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorpusSpec& spec);
CorpusSpec load_corpus_spec(const fs::path& path);

struct SampleRecord {
  std::string path;  // relative to the manifest's directory
  int label = 0;
  std::string method = "none";
  double ratio = 0.0;
  std::string split;
  std::string source_id;  // stem of the original every derivative came from

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

nlohmann::ordered_json to_json(const SampleRecord& r);
SampleRecord sample_record_from_json(const nlohmann::json& j);

void write_manifest(const fs::path& path, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_manifest(const fs::path& path);

struct CorpusReport {
  std::vector<SampleRecord> records;
  std::vector<std::string> skipped;  // unreadable or undersized sources, with reason
  fs::path manifest_path;
};

// Saves originals plus removed/inserted variants for every (method, ratio),
// assigns splits per original and writes <output_dir>/manifest.jsonl.
CorpusReport build_corpus(const CorpusSpec& spec);

// Robustness test sets, each in <output_dir>/robustness/<name>/ with its own
// manifest. Built from the test-split originals only. Keys are set names.
std::map<std::string, std::vector<SampleRecord>> gen_robustness_sets(const CorpusSpec& spec);

// Deterministic split assignment of original ids. Input order does not matter.
std::map<std::string, std::string> assign_splits(std::vector<std::string> ids,
                                                 const std::array<double, 3>& splits,
                                                 std::uint64_t seed);

// Central W x H region; throws std::invalid_argument if the image is smaller.
Image center_crop(const Image& img, int width, int height);

// W x H region anchored at (0,0); throws std::invalid_argument if undersized.
Image crop_topleft(const Image& img, int width, int height);

// Class 0 records repeated once per distinct (method, ratio) of the
// class-1 records in the same split, so every split reads 1:1:1.
std::vector<SampleRecord> balanced_view(const std::vector<SampleRecord>& records);

struct PatchCoord {
  int rx = 0;
  int ry = 0;
  friend bool operator==(const PatchCoord&, const PatchCoord&) = default;
};

// First coordinate is (0,0); the remaining theta-1 are uniform integer
// draws over [0, image_w - w] x [0, image_h - h].
std::vector<PatchCoord> sample_patch_coords(int image_w, int image_h, int w, int h, int theta,
                                            std::uint64_t seed);

struct PatchRecord {
  std::string image_id;
  int rx = 0;
  int ry = 0;
  int w = 0;
  int h = 0;
  int patch_index = 0;

  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

nlohmann::ordered_json to_json(const PatchRecord& r);
PatchRecord patch_record_from_json(const nlohmann::json& j);
void write_patch_manifest(const fs::path& path, const std::vector<PatchRecord>& records);
std::vector<PatchRecord> read_patch_manifest(const fs::path& path);

// Per-image RNG stream from a global seed and a stable id.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view id);

struct PatchSamplingOptions {
  int w = 256;
  int h = 256;
  int theta = 1;
  std::uint64_t seed = 0;
  std::string split;           // empty = all records
  fs::path emit_crops_dir;     // empty = no crop files
};

// Samples patches for every record of a manifest; image paths resolve against
// base_dir. image_id is the record's path.
std::vector<PatchRecord> sample_patches(const std::vector<SampleRecord>& records,
                                        const fs::path& base_dir,
                                        const PatchSamplingOptions& options);

}  // namespace seamforge
