#include "seamforge/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace seamforge {

namespace {

constexpr double kSimplexTolerance = 1e-6;

template <typename Record, typename FromJson>
std::vector<Record> read_lines(const fs::path& path, FromJson from_json_fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_fn(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename Record>
void write_lines(const fs::path& path, const std::vector<Record>& records) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

ClassProbs probs_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument("probs must have exactly 3 entries");
  return {v[0], v[1], v[2]};
}

std::string percent_name(double ratio) {
  std::ostringstream os;
  os << std::round(ratio * 1e6) / 1e4 << '%';
  return os.str();
}

}  // namespace

void check_simplex(const ClassProbs& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

int argmax(const ClassProbs& probs) {
  int best = 0;
  for (int c = 1; c < 3; ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return best;
}

nlohmann::ordered_json to_json(const PredictionRecord& r) {
  nlohmann::ordered_json j;
  j["image_id"] = r.image_id;
  j["patch_index"] = r.patch_index;
  j["probs"] = r.probs;
  return j;
}

PredictionRecord prediction_record_from_json(const nlohmann::json& j) {
  PredictionRecord r{j.at("image_id").get<std::string>(), j.at("patch_index").get<int>(),
                     probs_from_json(j.at("probs"))};
  check_simplex(r.probs);
  return r;
}

void write_predictions(const fs::path& path, const std::vector<PredictionRecord>& records) {
  write_lines(path, records);
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  return read_lines<PredictionRecord>(path, prediction_record_from_json);
}

nlohmann::ordered_json to_json(const Aggregate& a) {
  nlohmann::ordered_json j;
  j["image_id"] = a.image_id;
  j["probs"] = a.probs;
  j["label"] = a.label;
  j["n_patches"] = a.n_patches;
  return j;
}

Aggregate aggregate_from_json(const nlohmann::json& j) {
  Aggregate a;
  a.image_id = j.at("image_id").get<std::string>();
  a.probs = probs_from_json(j.at("probs"));
  check_simplex(a.probs);
  a.label = j.contains("label") ? j["label"].get<int>() : argmax(a.probs);
  a.n_patches = j.value("n_patches", 1);
  return a;
}

void write_aggregates(const fs::path& path, const std::vector<Aggregate>& aggregates) {
  write_lines(path, aggregates);
}

std::vector<Aggregate> read_aggregates(const fs::path& path) {
  return read_lines<Aggregate>(path, aggregate_from_json);
}

Aggregate aggregate_probs(std::span<const PredictionRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate_probs: no records");
  const std::string& id = records.front().image_id;
  std::vector<const PredictionRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) {
    if (r.image_id != id) {
      throw std::invalid_argument("aggregate_probs: mixed image ids '" + id + "' and '" +
                                  r.image_id + "'");
    }
    check_simplex(r.probs);
    ordered.push_back(&r);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->patch_index < b->patch_index; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->patch_index == ordered[i - 1]->patch_index) {
      throw std::invalid_argument("aggregate_probs: duplicate patch_index " +
                                  std::to_string(ordered[i]->patch_index) + " for '" + id + "'");
    }
  }

  Aggregate out;
  out.image_id = id;
  out.n_patches = static_cast<int>(ordered.size());
  ClassProbs sum{0.0, 0.0, 0.0};
  for (const auto* r : ordered) {
    for (int c = 0; c < 3; ++c) sum[c] += r->probs[c];
  }
  for (int c = 0; c < 3; ++c) out.probs[c] = sum[c] / static_cast<double>(ordered.size());
  out.label = argmax(out.probs);
  return out;
}

std::vector<Aggregate> aggregate_predictions(const std::vector<PredictionRecord>& predictions,
                                             const std::vector<PatchRecord>* manifest) {
  std::map<std::string, std::vector<PredictionRecord>> groups;
  for (const auto& p : predictions) groups[p.image_id].push_back(p);

  std::vector<std::string> order;
  if (manifest) {
    std::map<std::string, std::set<int>> expected;
    for (const auto& patch : *manifest) {
      if (!expected[patch.image_id].insert(patch.patch_index).second) {
        throw std::invalid_argument("patch manifest lists '" + patch.image_id + "' patch " +
                                    std::to_string(patch.patch_index) + " twice");
      }
      if (expected[patch.image_id].size() == 1) order.push_back(patch.image_id);
    }
    for (const auto& [id, records] : groups) {
      const auto it = expected.find(id);
      if (it == expected.end()) {
        throw std::invalid_argument("prediction for '" + id + "' not in the patch manifest");
      }
      std::set<int> seen;
      for (const auto& r : records) {
        if (!it->second.count(r.patch_index)) {
          throw std::invalid_argument("prediction for '" + id + "' patch " +
                                      std::to_string(r.patch_index) + " not in the manifest");
        }
        seen.insert(r.patch_index);
      }
      if (seen.size() != it->second.size()) {
        throw std::invalid_argument("'" + id + "' has " + std::to_string(seen.size()) + " of " +
                                    std::to_string(it->second.size()) + " patch predictions");
      }
    }
    for (const auto& [id, patches] : expected) {
      if (!groups.count(id)) throw std::invalid_argument("no predictions for '" + id + "'");
    }
  } else {
    for (const auto& [id, records] : groups) order.push_back(id);
  }

  std::vector<Aggregate> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(aggregate_probs(groups.at(id)));
  return out;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("roc_curve: scores and labels differ in length");
  }
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double n_neg = static_cast<double>(positive.size()) - n_pos;

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0;
  double fp = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    const double threshold = scores[idx[i]];
    const double tp_before = tp;
    const double fp_before = fp;
    for (; i < idx.size() && scores[idx[i]] == threshold; ++i) {
      if (positive[idx[i]]) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
    }
    area += (fp - fp_before) * (tp + tp_before) / 2.0;
    curve.points.push_back({n_neg > 0 ? fp / n_neg : 0.0, n_pos > 0 ? tp / n_pos : 0.0, threshold});
  }
  curve.auc = (n_pos > 0 && n_neg > 0) ? area / (n_pos * n_neg)
                                       : std::numeric_limits<double>::quiet_NaN();
  return curve;
}

EvalReport score_report(std::span<const int> truth, std::span<const ClassProbs> probs) {
  if (truth.size() != probs.size()) {
    throw std::invalid_argument("score_report: " + std::to_string(truth.size()) + " labels vs " +
                                std::to_string(probs.size()) + " predictions");
  }
  EvalReport report;
  report.total = truth.size();
  long long correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] > 2) {
      throw std::invalid_argument("score_report: label " + std::to_string(truth[i]) +
                                  " out of range");
    }
    const int predicted = argmax(probs[i]);
    ++report.confusion[truth[i]][predicted];
    if (predicted == truth[i]) ++correct;
  }
  report.accuracy = report.total ? 100.0 * static_cast<double>(correct) /
                                       static_cast<double>(report.total)
                                 : 0.0;
  for (int r = 0; r < 3; ++r) {
    const long long row = std::accumulate(report.confusion[r].begin(), report.confusion[r].end(), 0LL);
    for (int c = 0; c < 3; ++c) {
      report.confusion_normalized[r][c] =
          row ? static_cast<double>(report.confusion[r][c]) / static_cast<double>(row) : 0.0;
    }
  }

  std::vector<double> scores(truth.size());
  for (int cls = 0; cls < 3; ++cls) {
    auto positive = std::make_unique<bool[]>(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      scores[i] = probs[i][cls];
      positive[i] = truth[i] == cls;
    }
    report.roc[cls] = roc_curve(scores, std::span<const bool>(positive.get(), truth.size()));
  }
  return report;
}

Evaluation evaluate(const std::vector<SampleRecord>& truth,
                    const std::vector<Aggregate>& aggregates) {
  std::map<std::string, const Aggregate*> by_id;
  for (const auto& a : aggregates) {
    if (!by_id.emplace(a.image_id, &a).second) {
      throw std::invalid_argument("duplicate aggregate for '" + a.image_id + "'");
    }
  }
  std::vector<SampleRecord> matched;
  std::set<std::string> truth_paths;
  Evaluation eval;
  for (const auto& r : truth) {
    truth_paths.insert(r.path);
    if (by_id.count(r.path)) {
      matched.push_back(r);
    } else {
      ++eval.unmatched_truth;
    }
  }
  for (const auto& a : aggregates) {
    if (!truth_paths.count(a.image_id)) {
      throw std::invalid_argument("aggregate '" + a.image_id + "' has no ground-truth record");
    }
  }
  if (matched.empty()) throw std::invalid_argument("no aggregates match the truth manifest");

  const auto balanced = balanced_view(matched);
  auto score = [&](const std::vector<const SampleRecord*>& subset) {
    std::vector<int> labels;
    std::vector<ClassProbs> probs;
    for (const auto* r : subset) {
      labels.push_back(r->label);
      probs.push_back(by_id.at(r->path)->probs);
    }
    return score_report(labels, probs);
  };

  std::map<double, std::vector<const SampleRecord*>> per_ratio;
  std::vector<const SampleRecord*> all;
  for (const auto& r : balanced) {
    per_ratio[r.ratio].push_back(&r);
    all.push_back(&r);
  }
  for (const auto& [ratio, subset] : per_ratio) {
    const EvalReport rep = score(subset);
    eval.rows.push_back({percent_name(ratio), rep.total, rep.accuracy});
  }
  eval.mixed = score(all);
  eval.rows.push_back({"Mixed", eval.mixed.total, eval.mixed.accuracy});
  return eval;
}

void write_report(const fs::path& dir, const Evaluation& evaluation) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "accuracy.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (dir / "accuracy.csv").string());
    csv << "ratio,n,accuracy\n";
    for (const auto& row : evaluation.rows) {
      char acc[32];
      std::snprintf(acc, sizeof(acc), "%.2f", row.accuracy);
      csv << row.name << ',' << row.total << ',' << acc << '\n';
    }
  }

  const EvalReport& m = evaluation.mixed;
  nlohmann::ordered_json j;
  j["total"] = m.total;
  j["accuracy"] = m.accuracy;
  j["unmatched_truth"] = evaluation.unmatched_truth;
  j["confusion"] = m.confusion;
  j["confusion_normalized"] = m.confusion_normalized;
  nlohmann::ordered_json roc = nlohmann::ordered_json::array();
  for (int cls = 0; cls < 3; ++cls) {
    nlohmann::ordered_json entry;
    entry["class"] = cls;
    entry["auc"] = std::isnan(m.roc[cls].auc) ? nlohmann::ordered_json(nullptr)
                                              : nlohmann::ordered_json(m.roc[cls].auc);
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& p : m.roc[cls].points) points.push_back({p.fpr, p.tpr});
    entry["points"] = std::move(points);
    roc.push_back(std::move(entry));
  }
  j["roc"] = std::move(roc);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : evaluation.rows) {
    rows.push_back({{"ratio", row.name}, {"n", row.total}, {"accuracy", row.accuracy}});
  }
  j["per_ratio"] = std::move(rows);

  std::ofstream out(dir / "report.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  out << j.dump(2) << '\n';
}

TileGeometry tile_geometry(int width, int height, int patch, int stride) {
  if (patch < 1 || stride < 1) {
    throw std::invalid_argument("tile_geometry: patch and stride must be >= 1");
  }
  if (width < patch || height < patch) {
    throw std::invalid_argument("tile_geometry: image " + std::to_string(width) + "x" +
                                std::to_string(height) + " smaller than patch " +
                                std::to_string(patch));
  }
  return {patch, stride, (width - patch) / stride + 1, (height - patch) / stride + 1};
}

std::vector<PatchRecord> tile_patches(const std::string& image_id, int width, int height,
                                      int patch, int stride) {
  const TileGeometry g = tile_geometry(width, height, patch, stride);
  std::vector<PatchRecord> out;
  out.reserve(g.count());
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      out.push_back({image_id, c * stride, r * stride, patch, patch, r * g.cols + c});
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const LocalizationMap& map) {
  nlohmann::ordered_json j;
  j["patch"] = map.geometry.patch;
  j["stride"] = map.geometry.stride;
  j["cols"] = map.geometry.cols;
  j["rows"] = map.geometry.rows;
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  nlohmann::ordered_json probs = nlohmann::ordered_json::array();
  for (int r = 0; r < map.geometry.rows; ++r) {
    nlohmann::ordered_json label_row = nlohmann::ordered_json::array();
    nlohmann::ordered_json prob_row = nlohmann::ordered_json::array();
    for (int c = 0; c < map.geometry.cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * map.geometry.cols + c;
      label_row.push_back(map.labels[i]);
      prob_row.push_back(map.probs[i]);
    }
    labels.push_back(std::move(label_row));
    probs.push_back(std::move(prob_row));
  }
  j["labels"] = std::move(labels);
  j["probs"] = std::move(probs);
  return j;
}

Localization localize(const Image& img, int patch, int stride,
                      std::span<const PredictionRecord> predictions) {
  const TileGeometry g = tile_geometry(img.width(), img.height(), patch, stride);
  if (static_cast<int>(predictions.size()) != g.count()) {
    throw std::invalid_argument("localize: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(g.count()) + " tiles");
  }
  Localization out;
  out.map.geometry = g;
  out.map.labels.assign(g.count(), 0);
  out.map.probs.assign(g.count(), ClassProbs{});
  std::vector<bool> filled(g.count(), false);
  for (const auto& p : predictions) {
    if (p.patch_index < 0 || p.patch_index >= g.count() || filled[p.patch_index]) {
      throw std::invalid_argument("localize: bad or repeated tile index " +
                                  std::to_string(p.patch_index));
    }
    check_simplex(p.probs);
    filled[p.patch_index] = true;
    out.map.probs[p.patch_index] = p.probs;
    out.map.labels[p.patch_index] = argmax(p.probs);
  }

  // Per-pixel mean of covering tiles' probabilities.
  const int w = img.width();
  const int h = img.height();
  std::vector<ClassProbs> acc(static_cast<std::size_t>(w) * h, ClassProbs{0.0, 0.0, 0.0});
  std::vector<int> cover(static_cast<std::size_t>(w) * h, 0);
  for (int t = 0; t < g.count(); ++t) {
    const int x0 = (t % g.cols) * stride;
    const int y0 = (t / g.cols) * stride;
    for (int y = y0; y < y0 + patch; ++y) {
      for (int x = x0; x < x0 + patch; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        for (int c = 0; c < 3; ++c) acc[i][c] += out.map.probs[t][c];
        ++cover[i];
      }
    }
  }

  out.overlay = img.channels() == 1 ? gray_to_rgb(img) : img;
  constexpr double kAlpha = 0.5;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (cover[i] == 0) continue;
      const int label = argmax(acc[i]);
      if (label == 0) continue;
      const std::array<double, 3> tint =
          label == 2 ? std::array<double, 3>{255.0, 0.0, 0.0} : std::array<double, 3>{0.0, 0.0, 255.0};
      for (int c = 0; c < 3; ++c) {
        double& v = out.overlay.at(x, y, c);
        v = std::round((1.0 - kAlpha) * v + kAlpha * tint[c]);
      }
    }
  }
  return out;
}

}  // namespace seamforge
