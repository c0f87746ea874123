#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seamforge/dataset.hpp"
#include "seamforge/image.hpp"

namespace seamforge {

using ClassProbs = std::array<double, 3>;

// One classifier output for one patch. JSONL fields: image_id, patch_index, probs.
struct PredictionRecord {
  std::string image_id;
  int patch_index = 0;
  ClassProbs probs{};
};

nlohmann::ordered_json to_json(const PredictionRecord& r);
// Rejects probability vectors off the simplex (negative, or sum off by > 1e-6).
PredictionRecord prediction_record_from_json(const nlohmann::json& j);
void write_predictions(const fs::path& path, const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> read_predictions(const fs::path& path);

void check_simplex(const ClassProbs& probs);

// Index of the largest entry; ties resolve to the lowest class index.
int argmax(const ClassProbs& probs);

struct Aggregate {
  std::string image_id;
  ClassProbs probs{};
  int label = 0;
  int n_patches = 0;
};

nlohmann::ordered_json to_json(const Aggregate& a);
Aggregate aggregate_from_json(const nlohmann::json& j);
void write_aggregates(const fs::path& path, const std::vector<Aggregate>& aggregates);
std::vector<Aggregate> read_aggregates(const fs::path& path);

// Mean of the patch probability vectors of one image, summed in patch_index
// order so the result does not depend on record order. Throws on an empty
// list, mixed image ids or a repeated patch_index.
Aggregate aggregate_probs(std::span<const PredictionRecord> records);

// Groups predictions by image and aggregates each group. When a patch
// manifest is given, every listed (image_id, patch_index) must have exactly
// one prediction and no others may appear; output follows manifest order.
std::vector<Aggregate> aggregate_predictions(const std::vector<PredictionRecord>& predictions,
                                             const std::vector<PatchRecord>* manifest = nullptr);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;              // NaN when a class has no positives or no negatives
};

// Full threshold sweep over distinct scores; AUC by the trapezoidal rule.
RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive);

using Confusion = std::array<std::array<long long, 3>, 3>;

struct EvalReport {
  std::size_t total = 0;
  double accuracy = 0.0;  // percent
  Confusion confusion{};  // rows = truth, columns = prediction
  std::array<std::array<double, 3>, 3> confusion_normalized{};  // row-normalized
  std::array<RocCurve, 3> roc;  // one-vs-rest per class
};

EvalReport score_report(std::span<const int> truth, std::span<const ClassProbs> probs);

struct RatioRow {
  std::string name;  // "10%", ..., "Mixed"
  std::size_t total = 0;
  double accuracy = 0.0;
};

struct Evaluation {
  EvalReport mixed;  // over the class-balanced view
  std::vector<RatioRow> rows;
  std::size_t unmatched_truth = 0;  // manifest records without an aggregate
};

// Joins manifest records (by path) with aggregates (by image_id). Class-0
// records are expanded with balanced_view so every ratio slice is 1:1:1.
Evaluation evaluate(const std::vector<SampleRecord>& truth,
                    const std::vector<Aggregate>& aggregates);

// accuracy.csv (ratio,n,accuracy) and report.json (confusion, ROC points).
void write_report(const fs::path& dir, const Evaluation& evaluation);

struct TileGeometry {
  int patch = 0;
  int stride = 0;
  int cols = 0;
  int rows = 0;
  int count() const { return cols * rows; }
};

// cols = floor((W - patch) / stride) + 1, rows likewise.
TileGeometry tile_geometry(int width, int height, int patch, int stride);

// Row-major PatchRecords for the tile grid; patch_index is the tile index.
std::vector<PatchRecord> tile_patches(const std::string& image_id, int width, int height,
                                      int patch, int stride);

struct LocalizationMap {
  TileGeometry geometry;
  std::vector<int> labels;        // row-major, one per tile
  std::vector<ClassProbs> probs;  // row-major, one per tile
};

nlohmann::ordered_json to_json(const LocalizationMap& map);

struct Localization {
  LocalizationMap map;
  Image overlay;  // RGB; removed regions tinted red, inserted regions blue
};

// Tiles need one prediction each, patch_index 0..count-1 in row-major order.
// Overlapping tiles average their probabilities per pixel; pixels outside
// every tile are left untouched.
Localization localize(const Image& img, int patch, int stride,
                      std::span<const PredictionRecord> predictions);

}  // namespace seamforge
