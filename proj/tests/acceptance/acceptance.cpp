#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "seamforge/cli.hpp"
#include "seamforge/dataset.hpp"
#include "seamforge/ensemble.hpp"
#include "seamforge/seam.hpp"

using namespace seamforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure only; later ones would just repeat it.
void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ClassProbs random_probs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ClassProbs p{u(rng), u(rng), u(rng)};
  const double s = p[0] + p[1] + p[2];
  for (double& v : p) v /= s;
  return p;
}

Outcome dp_optimality() {
  constexpr int kImages = 1000;
  constexpr double kTol = 1e-9;
  constexpr double kBudget = 30.0;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(3, 6);
  double worst = 0.0;
  for (SeamMethod method : all_seam_methods()) {
    for (int i = 0; i < kImages; ++i) {
      const int w = dim(rng);
      const int h = dim(rng);
      const Image img = oracle::random_image(rng, w, h, 3);
      const auto ref = oracle::method_costs(img, method);
      const double best = oracle::brute_force_min_cost(w, h, ref.base, ref.step);
      const Seam s = find_optimal_seam(img, method);
      expect(o, is_valid_seam(s, w, h), std::string(to_string(method)) + ": invalid seam");
      if (!is_valid_seam(s, w, h)) continue;
      const double delta = std::fabs(oracle::seam_cost(s.columns, ref.base, ref.step) - best);
      worst = std::max(worst, delta);
      expect(o, delta < kTol,
             std::string(to_string(method)) + ": |delta| " + std::to_string(delta) + " on " +
                 std::to_string(w) + "x" + std::to_string(h));
    }
  }
  const double elapsed = seconds_since(t0);
  expect(o, elapsed < kBudget, "took " + std::to_string(elapsed) + " s");
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "4 x %d images, max |delta| %.3g, %.1f s", kImages, worst, elapsed);
    o.detail = buf;
  }
  return o;
}

Outcome retarget_dimensions() {
  Outcome o;
  std::mt19937_64 rng(2);
  const Image img = oracle::random_image(rng, 512, 384, 3);
  struct Case {
    double ratio;
    RetargetMode mode;
    int width;
  };
  std::string got;
  for (const Case& c : {Case{0.1, RetargetMode::kRemove, 461}, Case{0.2, RetargetMode::kRemove, 410},
                        Case{0.1, RetargetMode::kInsert, 563}, Case{0.2, RetargetMode::kInsert, 614}}) {
    const auto r = retarget(img, {SeamMethod::kAvidan, c.ratio, c.mode, Axis::kVertical});
    const std::string dims = std::to_string(r.image.width()) + "x" + std::to_string(r.image.height());
    got += (got.empty() ? "" : ", ") + dims;
    expect(o, r.image.width() == c.width && r.image.height() == 384,
           "expected " + std::to_string(c.width) + "x384, got " + dims);
  }
  if (o.pass) o.detail = got;
  return o;
}

Outcome seam_validity() {
  constexpr int kRetargets = 1000;
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(6, 40);
  std::uniform_real_distribution<double> ratio(0.05, 0.6);
  long long seams = 0;
  int done = 0;
  while (done < kRetargets) {
    const int w = dim(rng);
    const int h = dim(rng);
    RetargetOptions opt;
    opt.method = all_seam_methods()[done % 4];
    opt.ratio = ratio(rng);
    opt.mode = (done / 4) % 2 ? RetargetMode::kInsert : RetargetMode::kRemove;
    opt.axis = (done / 8) % 2 ? Axis::kHorizontal : Axis::kVertical;
    const int extent = opt.axis == Axis::kVertical ? w : h;
    const int k = seam_count(opt.ratio, extent);
    if (k < 1 || k >= extent - 2) continue;
    const Image img = oracle::random_image(rng, w, h, 3);
    const auto r = retarget(img, opt);
    const int frame_h = opt.axis == Axis::kVertical ? h : w;
    expect(o, static_cast<int>(r.seams.size()) == k, "seam count mismatch");
    for (std::size_t i = 0; i < r.seams.size(); ++i) {
      const auto& cols = r.seams[i].columns;
      const int frame_w = extent - static_cast<int>(i);
      bool ok = static_cast<int>(cols.size()) == frame_h;
      for (std::size_t y = 0; ok && y < cols.size(); ++y) {
        ok = cols[y] >= 0 && cols[y] < frame_w && (y == 0 || std::abs(cols[y] - cols[y - 1]) <= 1);
      }
      expect(o, ok, "invalid seam " + std::to_string(i) + " in retarget " + std::to_string(done));
      ++seams;
    }
    ++done;
  }
  if (o.pass) o.detail = std::to_string(seams) + " seams from " + std::to_string(done) + " retargets";
  return o;
}

Outcome corpus_arithmetic() {
  Outcome o;
  const auto root = fixtures::scratch_dir("acceptance_corpus");
  fixtures::write_sources(root / "src", 10, 512, 384, 4);
  CorpusSpec spec;
  spec.source_dir = root / "src";
  spec.output_dir = root / "out";
  spec.seed = 4;
  const auto t0 = std::chrono::steady_clock::now();
  const CorpusReport report = build_corpus(spec);
  const double elapsed = seconds_since(t0);

  const auto files = fixtures::files_under(spec.output_dir, ".jpg");
  expect(o, files.size() == 110, "files on disk: " + std::to_string(files.size()));
  const auto manifest = read_manifest(report.manifest_path);
  expect(o, manifest.size() == 110, "manifest lines: " + std::to_string(manifest.size()));

  std::map<int, int> per_label;
  std::map<std::pair<int, double>, int> per_key;
  std::map<std::string, std::set<std::string>> splits_of;
  for (const auto& r : manifest) {
    ++per_label[r.label];
    if (r.label != 0) ++per_key[{r.label, r.ratio}];
    splits_of[r.source_id].insert(r.split);
    expect(o, files.count(fs::path(r.path)) == 1, "manifest path missing: " + r.path);
  }
  expect(o, per_label[0] == 10 && per_label[1] == 50 && per_label[2] == 50, "label counts");
  for (const auto& [key, n] : per_key) expect(o, n == 10, "per-ratio class count");
  expect(o, per_key.size() == 10, "distinct (class, ratio) keys");

  std::map<std::string, std::array<int, 3>> balanced;
  for (const auto& r : balanced_view(manifest)) ++balanced[r.split][r.label];
  for (const auto& [split, c] : balanced) {
    expect(o, c[0] == c[1] && c[1] == c[2], "unbalanced " + split + " split");
  }
  expect(o, splits_of.size() == 10, "originals: " + std::to_string(splits_of.size()));
  std::map<std::string, int> originals_per_split;
  for (const auto& [id, splits] : splits_of) {
    expect(o, splits.size() == 1, "original " + id + " spans splits");
    ++originals_per_split[*splits.begin()];
  }
  expect(o, originals_per_split["train"] == 8 && originals_per_split["val"] == 1 &&
                originals_per_split["test"] == 1,
         "split sizes");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "110 files (10/50/50), 1:1:1 per split, 8/1/1 originals, no leakage, %.1f s",
                  elapsed);
    o.detail = buf;
  }
  return o;
}

Outcome ensemble_contract() {
  constexpr int kSets = 100;
  constexpr int kDraws = 10000;
  constexpr double kMeanTol = 3.0;
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> theta(1, 20);
  for (int s = 0; s < kSets; ++s) {
    const int n = theta(rng);
    std::vector<PredictionRecord> recs;
    for (int i = 0; i < n; ++i) recs.push_back({"img", i, random_probs(rng)});
    ClassProbs hand{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) hand[c] += recs[i].probs[c];
    }
    for (double& v : hand) v /= n;
    std::shuffle(recs.begin(), recs.end(), rng);
    const Aggregate a = aggregate_probs(recs);
    expect(o, a.probs == hand, "mean mismatch in set " + std::to_string(s));
    int hand_label = 0;
    for (int c = 1; c < 3; ++c) {
      if (hand[c] > hand[hand_label]) hand_label = c;
    }
    expect(o, a.label == hand_label, "label mismatch in set " + std::to_string(s));
  }

  for (int s = 0; s < kSets; ++s) {
    const auto coords = sample_patch_coords(512, 384, 256, 256, 1, rng());
    expect(o, coords.size() == 1 && coords[0] == PatchCoord{0, 0}, "theta=1 crop not at origin");
    const PredictionRecord single{"img", 0, random_probs(rng)};
    const Aggregate a = aggregate_probs(std::span<const PredictionRecord>(&single, 1));
    expect(o, a.probs == single.probs && a.label == argmax(single.probs),
           "theta=1 decision differs from the patch");
  }

  const auto coords = sample_patch_coords(512, 384, 256, 256, kDraws, 6);
  double mx = 0.0;
  double my = 0.0;
  for (const auto& c : coords) {
    mx += c.rx;
    my += c.ry;
  }
  mx /= kDraws;
  my /= kDraws;
  expect(o, std::fabs(mx - 128.0) < kMeanTol && std::fabs(my - 64.0) < kMeanTol,
         "coordinate mean (" + std::to_string(mx) + ", " + std::to_string(my) + ")");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d exact means, theta=1 ok, coordinate mean (%.2f, %.2f) vs (128, 64)",
                  kSets, mx, my);
    o.detail = buf;
  }
  return o;
}

Outcome metrics_oracle() {
  constexpr int kSets = 100;
  constexpr double kTol = 1e-9;
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_int_distribution<int> tenth(0, 10);
  double worst = 0.0;
  for (int s = 0; s < kSets; ++s) {
    const int n = size(rng);
    std::vector<double> scores(n);
    std::vector<bool> positive(n);
    auto flags = std::make_unique<bool[]>(n);
    for (int i = 0; i < n; ++i) {
      // Every other set uses coarse scores so ties are exercised.
      scores[i] = s % 2 ? tenth(rng) / 10.0 : std::uniform_real_distribution<double>()(rng);
      positive[i] = i == 0 || (i != 1 && tenth(rng) < 4);
      flags[i] = positive[i];
    }
    const double auc = roc_curve(scores, std::span<const bool>(flags.get(), n)).auc;
    const double delta = std::fabs(auc - oracle::pair_count_auc(scores, positive));
    worst = std::max(worst, delta);
    expect(o, delta < kTol, "AUC delta " + std::to_string(delta) + " in set " + std::to_string(s));
  }

  std::uniform_int_distribution<int> label(0, 2);
  for (int s = 0; s < kSets; ++s) {
    const int n = size(rng);
    std::vector<int> truth(n);
    std::vector<ClassProbs> probs(n);
    Confusion hand{};
    long long correct = 0;
    for (int i = 0; i < n; ++i) {
      truth[i] = label(rng);
      probs[i] = random_probs(rng);
      int pred = 0;
      for (int c = 1; c < 3; ++c) {
        if (probs[i][c] > probs[i][pred]) pred = c;
      }
      ++hand[truth[i]][pred];
      correct += pred == truth[i];
    }
    const EvalReport rep = score_report(truth, probs);
    long long total = 0;
    long long diag = 0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) total += rep.confusion[r][c];
      diag += rep.confusion[r][r];
    }
    expect(o, rep.confusion == hand, "confusion differs from hand count");
    expect(o, total == n && diag == correct, "confusion sums");
    expect(o, rep.accuracy == 100.0 * static_cast<double>(correct) / n, "accuracy");
  }

  const TileGeometry g = tile_geometry(4224, 2816, 128, 128);
  expect(o, g.count() == 726, "tiles: " + std::to_string(g.count()));
  expect(o, tile_patches("frame", 4224, 2816, 128, 128).size() == 726, "tile manifest size");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max AUC delta %.3g over %d sets, identities exact, %dx%d = %d tiles",
                  worst, kSets, g.cols, g.rows, g.count());
    o.detail = buf;
  }
  return o;
}

// Synthetic PredictionRecord files through the aggregate and eval commands.
Outcome synthetic_pipeline() {
  Outcome o;
  const auto dir = fixtures::scratch_dir("acceptance_pipeline");
  std::vector<SampleRecord> truth;
  std::vector<PatchRecord> patches;
  std::vector<PredictionRecord> preds;
  std::mt19937_64 rng(8);
  const char* dirs[3] = {"original", "inserted", "removed"};
  constexpr int kTheta = 5;
  for (int id = 0; id < 6; ++id) {
    for (int label = 0; label < 3; ++label) {
      const std::vector<double> ratios = label ? std::vector<double>{0.1, 0.3} : std::vector<double>{0.0};
      for (double ratio : ratios) {
        const std::string path = std::string(dirs[label]) + "/" + std::to_string(id) + "_" +
                                 std::to_string(static_cast<int>(ratio * 100)) + ".jpg";
        truth.push_back({path, label, label ? "avidan" : "none", ratio, "test", std::to_string(id)});
        for (int p = 0; p < kTheta; ++p) {
          patches.push_back({path, 0, 0, 256, 256, p});
          ClassProbs probs = random_probs(rng);
          // Images with an even id get a strong vote for the true class.
          if (id % 2 == 0) {
            probs = {0.05, 0.05, 0.05};
            probs[label] = 0.9;
          }
          preds.push_back({path, p, probs});
        }
      }
    }
  }
  write_manifest(dir / "manifest.jsonl", truth);
  write_patch_manifest(dir / "patches.jsonl", patches);
  write_predictions(dir / "preds.jsonl", preds);

  std::ostringstream out;
  std::ostringstream err;
  int code = dispatch({"aggregate", "--preds", (dir / "preds.jsonl").string(), "--manifest",
                       (dir / "patches.jsonl").string(), "--out", (dir / "agg.jsonl").string()},
                      out, err);
  expect(o, code == kExitOk, "aggregate exit " + std::to_string(code) + ": " + err.str());
  code = dispatch({"eval", "--truth", (dir / "manifest.jsonl").string(), "--agg",
                   (dir / "agg.jsonl").string(), "--report", (dir / "report").string()},
                  out, err);
  expect(o, code == kExitOk, "eval exit " + std::to_string(code) + ": " + err.str());
  if (!o.pass) return o;

  // Recompute the mixed accuracy directly from the prediction records.
  std::map<std::string, ClassProbs> sums;
  for (const auto& p : preds) {
    for (int c = 0; c < 3; ++c) sums[p.image_id][c] += p.probs[c];
  }
  const auto balanced = balanced_view(truth);
  long long correct = 0;
  for (const auto& r : balanced) {
    const ClassProbs& s = sums.at(r.path);
    int pred = 0;
    for (int c = 1; c < 3; ++c) {
      if (s[c] > s[pred]) pred = c;
    }
    correct += pred == r.label;
  }
  const double expected = 100.0 * static_cast<double>(correct) / static_cast<double>(balanced.size());
  const auto report = nlohmann::json::parse(fixtures::slurp(dir / "report/report.json"));
  expect(o, report["total"].get<std::size_t>() == balanced.size(), "report total");
  expect(o, std::fabs(report["accuracy"].get<double>() - expected) < 1e-9,
         "report accuracy " + report["accuracy"].dump() + " vs " + std::to_string(expected));
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu predictions -> %zu aggregates -> accuracy %.2f%%",
                  preds.size(), truth.size(), expected);
    o.detail = buf;
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dp-optimality", dp_optimality},
      {"retarget-dimensions", retarget_dimensions},
      {"seam-validity", seam_validity},
      {"corpus-arithmetic", corpus_arithmetic},
      {"ensemble-contract", ensemble_contract},
      {"metrics-oracle", metrics_oracle},
      {"synthetic-pipeline", synthetic_pipeline},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
