#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "seamforge/ensemble.hpp"

using namespace seamforge;
namespace fs = std::filesystem;

namespace {

ClassProbs random_probs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ClassProbs p{u(rng), u(rng), u(rng)};
  const double s = p[0] + p[1] + p[2];
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("argmax ties go to the lowest class") {
  CHECK(argmax({0.2, 0.5, 0.3}) == 1);
  CHECK(argmax({0.4, 0.4, 0.2}) == 0);
  CHECK(argmax({0.2, 0.4, 0.4}) == 1);
  CHECK(argmax({1.0 / 3, 1.0 / 3, 1.0 / 3}) == 0);
}

TEST_CASE("three-patch aggregate by hand") {
  const std::vector<PredictionRecord> recs{{"x", 0, {0.6, 0.3, 0.1}},
                                           {"x", 1, {0.2, 0.5, 0.3}},
                                           {"x", 2, {0.1, 0.2, 0.7}}};
  const Aggregate a = aggregate_probs(recs);
  CHECK(a.probs[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(a.probs[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(a.probs[2] == doctest::Approx(1.1 / 3).epsilon(1e-12));
  CHECK(a.label == 2);
  CHECK(a.n_patches == 3);
}

TEST_CASE("single patch aggregate is the patch") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const PredictionRecord r{"img", 0, random_probs(rng)};
    const Aggregate a = aggregate_probs(std::span<const PredictionRecord>(&r, 1));
    CHECK(a.probs == r.probs);
    CHECK(a.label == argmax(r.probs));
  }
}

TEST_CASE("aggregate is order independent and exact") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<PredictionRecord> recs;
    for (int i = 0; i < n; ++i) recs.push_back({"img", i, random_probs(rng)});
    ClassProbs expect{0.0, 0.0, 0.0};
    for (const auto& r : recs) {
      for (int c = 0; c < 3; ++c) expect[c] += r.probs[c];
    }
    for (double& v : expect) v /= n;
    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(aggregate_probs(recs).probs == expect);
    CHECK(aggregate_probs(shuffled).probs == expect);
  }
}

TEST_CASE("aggregate rejects bad inputs") {
  CHECK_THROWS(aggregate_probs(std::vector<PredictionRecord>{}));
  CHECK_THROWS(aggregate_probs(std::vector<PredictionRecord>{{"a", 0, {1, 0, 0}}, {"b", 1, {1, 0, 0}}}));
  CHECK_THROWS(aggregate_probs(std::vector<PredictionRecord>{{"a", 0, {1, 0, 0}}, {"a", 0, {0, 1, 0}}}));
  CHECK_THROWS(check_simplex({0.5, 0.5, 0.1}));
  CHECK_THROWS(check_simplex({1.2, -0.2, 0.0}));
  CHECK_NOTHROW(check_simplex({0.5, 0.5, 1e-7}));
}

TEST_CASE("aggregate_predictions checks manifest coverage") {
  const std::vector<PatchRecord> manifest{{"b", 0, 0, 4, 4, 0}, {"b", 1, 1, 4, 4, 1}, {"a", 0, 0, 4, 4, 0}};
  std::vector<PredictionRecord> preds{{"a", 0, {0.1, 0.1, 0.8}}, {"b", 1, {0.5, 0.5, 0.0}},
                                      {"b", 0, {0.7, 0.2, 0.1}}};
  const auto aggs = aggregate_predictions(preds, &manifest);
  REQUIRE(aggs.size() == 2u);
  CHECK(aggs[0].image_id == "b");
  CHECK(aggs[0].label == 0);
  CHECK(aggs[1].label == 2);
  CHECK(aggregate_predictions(preds).front().image_id == "a");

  auto missing = preds;
  missing.pop_back();
  CHECK_THROWS(aggregate_predictions(missing, &manifest));
  auto extra = preds;
  extra.push_back({"c", 0, {1, 0, 0}});
  CHECK_THROWS(aggregate_predictions(extra, &manifest));
  auto stray = preds;
  stray.push_back({"a", 5, {1, 0, 0}});
  CHECK_THROWS(aggregate_predictions(stray, &manifest));
}

TEST_CASE("prediction and aggregate JSONL") {
  const auto dir = fixtures::scratch_dir("ensemble_io");
  const std::vector<PredictionRecord> preds{{"a.jpg", 0, {0.25, 0.25, 0.5}}, {"a.jpg", 1, {1, 0, 0}}};
  write_predictions(dir / "p.jsonl", preds);
  const auto back = read_predictions(dir / "p.jsonl");
  REQUIRE(back.size() == 2u);
  CHECK(back[0].probs == preds[0].probs);
  CHECK(back[1].patch_index == 1);

  const auto aggs = aggregate_predictions(preds);
  write_aggregates(dir / "a.jsonl", aggs);
  const auto aback = read_aggregates(dir / "a.jsonl");
  CHECK(aback[0].probs == aggs[0].probs);
  CHECK(aback[0].n_patches == 2);

  std::ofstream(dir / "bad.jsonl") << R"({"image_id":"a","patch_index":0,"probs":[0.5,0.6,0.0]})" << "\n";
  CHECK_THROWS(read_predictions(dir / "bad.jsonl"));
  std::ofstream(dir / "short.jsonl") << R"({"image_id":"a","patch_index":0,"probs":[0.5,0.5]})" << "\n";
  CHECK_THROWS(read_predictions(dir / "short.jsonl"));
}

TEST_CASE("ROC of a perfect and an inverted ranking") {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
  const bool pos[] = {true, true, false, false};
  const bool neg[] = {false, false, true, true};
  const auto good = roc_curve(s, pos);
  CHECK(good.auc == 1.0);
  CHECK(good.points.front().fpr == 0.0);
  CHECK(good.points.back().fpr == 1.0);
  CHECK(good.points.back().tpr == 1.0);
  CHECK(roc_curve(s, neg).auc == 0.0);
  const bool all[] = {true, true, true, true};
  CHECK(std::isnan(roc_curve(s, all).auc));
}

TEST_CASE("AUC equals the pair-count statistic") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    std::vector<double> scores(n);
    std::vector<bool> positive(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? coarse(rng) / 10.0 : std::uniform_real_distribution<double>()(rng);
      positive[i] = coarse(rng) < 4;
    }
    positive[0] = true;
    positive[1] = false;
    auto flags = std::make_unique<bool[]>(n);
    for (int i = 0; i < n; ++i) flags[i] = positive[i];
    const auto curve = roc_curve(scores, std::span<const bool>(flags.get(), n));
    CHECK(std::fabs(curve.auc - oracle::pair_count_auc(scores, positive)) < 1e-9);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
  }
}

TEST_CASE("score report identities") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<int> truth;
  std::vector<ClassProbs> probs;
  for (int i = 0; i < 300; ++i) {
    truth.push_back(label(rng));
    probs.push_back(random_probs(rng));
  }
  const EvalReport rep = score_report(truth, probs);
  long long sum = 0;
  long long diag = 0;
  for (int r = 0; r < 3; ++r) {
    long long row = 0;
    for (int c = 0; c < 3; ++c) {
      sum += rep.confusion[r][c];
      row += rep.confusion[r][c];
    }
    diag += rep.confusion[r][r];
    CHECK(row == std::count(truth.begin(), truth.end(), r));
    double nrow = 0.0;
    for (int c = 0; c < 3; ++c) nrow += rep.confusion_normalized[r][c];
    CHECK(std::fabs(nrow - 1.0) < 1e-12);
  }
  CHECK(sum == 300);
  CHECK(rep.accuracy == 100.0 * static_cast<double>(diag) / 300.0);

  const std::vector<int> t2{0, 1, 2, 2};
  const std::vector<ClassProbs> p2{{0.8, 0.1, 0.1}, {0.1, 0.1, 0.8}, {0.1, 0.1, 0.8}, {0.5, 0.4, 0.1}};
  const EvalReport r2 = score_report(t2, p2);
  CHECK(r2.accuracy == 50.0);
  CHECK(r2.confusion[1][2] == 1);
  CHECK(r2.confusion[2][0] == 1);
  CHECK_THROWS(score_report(std::vector<int>{3}, std::vector<ClassProbs>{{1, 0, 0}}));
}

TEST_CASE("evaluate joins truth and aggregates per ratio") {
  const std::vector<SampleRecord> truth{
      {"original/a.jpg", 0, "none", 0.0, "test", "a"},
      {"inserted/avidan/r10/a.jpg", 1, "avidan", 0.1, "test", "a"},
      {"inserted/avidan/r20/a.jpg", 1, "avidan", 0.2, "test", "a"},
      {"removed/avidan/r10/a.jpg", 2, "avidan", 0.1, "test", "a"},
      {"removed/avidan/r20/a.jpg", 2, "avidan", 0.2, "test", "a"},
      {"original/b.jpg", 0, "none", 0.0, "train", "b"}};
  const std::vector<Aggregate> aggs{
      {"original/a.jpg", {0.7, 0.2, 0.1}, 0, 1},
      {"inserted/avidan/r10/a.jpg", {0.1, 0.8, 0.1}, 1, 1},
      {"inserted/avidan/r20/a.jpg", {0.1, 0.1, 0.8}, 2, 1},
      {"removed/avidan/r10/a.jpg", {0.1, 0.1, 0.8}, 2, 1},
      {"removed/avidan/r20/a.jpg", {0.1, 0.1, 0.8}, 2, 1}};
  const Evaluation ev = evaluate(truth, aggs);
  CHECK(ev.unmatched_truth == 1u);
  REQUIRE(ev.rows.size() == 3u);
  CHECK(ev.rows[0].name == "10%");
  CHECK(ev.rows[0].total == 3u);
  CHECK(ev.rows[0].accuracy == 100.0);
  CHECK(ev.rows[1].name == "20%");
  CHECK(ev.rows[1].accuracy == doctest::Approx(200.0 / 3));
  CHECK(ev.rows[2].name == "Mixed");
  CHECK(ev.rows[2].total == 6u);
  CHECK(ev.mixed.accuracy == doctest::Approx(500.0 / 6));

  const auto dir = fixtures::scratch_dir("report");
  write_report(dir, ev);
  const std::string csv = fixtures::slurp(dir / "accuracy.csv");
  CHECK(csv == "ratio,n,accuracy\n10%,3,100.00\n20%,3,66.67\nMixed,6,83.33\n");
  const auto j = nlohmann::json::parse(fixtures::slurp(dir / "report.json"));
  CHECK(j["confusion"][1][2] == 1);
  CHECK(j["roc"].size() == 3u);

  auto orphan = aggs;
  orphan.push_back({"nowhere.jpg", {1, 0, 0}, 0, 1});
  CHECK_THROWS(evaluate(truth, orphan));
  auto dup = aggs;
  dup.push_back(aggs[0]);
  CHECK_THROWS(evaluate(truth, dup));
}

TEST_CASE("tile geometry") {
  const TileGeometry g = tile_geometry(4224, 2816, 128, 128);
  CHECK(g.cols == 33);
  CHECK(g.rows == 22);
  CHECK(g.count() == 726);
  CHECK(tile_geometry(256, 256, 128, 128).count() == 4);
  CHECK(tile_geometry(300, 200, 128, 64).cols == 3);
  CHECK(tile_geometry(300, 200, 128, 64).rows == 2);
  CHECK_THROWS(tile_geometry(100, 300, 128, 128));
  CHECK_THROWS(tile_geometry(300, 300, 128, 0));
  const auto tiles = tile_patches("big", 4224, 2816, 128, 128);
  REQUIRE(tiles.size() == 726u);
  CHECK(tiles[34] == PatchRecord{"big", 128, 128, 128, 128, 34});
}

TEST_CASE("localization overlay colours") {
  const Image img(4, 2, 3, 100.0);
  // Tiles 2x2 at stride 2: left tile removed, right tile original.
  const std::vector<PredictionRecord> preds{{"x", 0, {0.1, 0.1, 0.8}}, {"x", 1, {0.8, 0.1, 0.1}}};
  const Localization loc = localize(img, 2, 2, preds);
  CHECK(loc.map.labels == std::vector<int>{2, 0});
  CHECK(loc.overlay.at(0, 0, 0) == std::round(0.5 * 100 + 0.5 * 255));
  CHECK(loc.overlay.at(1, 1, 1) == 50.0);
  CHECK(loc.overlay.at(3, 0, 0) == 100.0);

  const std::vector<PredictionRecord> blue{{"x", 0, {0.1, 0.8, 0.1}}};
  const Localization l2 = localize(Image(3, 3, 1, 20.0), 2, 2, blue);
  CHECK(l2.overlay.channels() == 3);
  CHECK(l2.overlay.at(0, 0, 2) == std::round(0.5 * 20 + 0.5 * 255));
  CHECK(l2.overlay.at(2, 2, 2) == 20.0);

  const auto j = to_json(loc.map);
  CHECK(j["cols"] == 2);
  CHECK(j["labels"][0][0] == 2);
  CHECK_THROWS(localize(img, 2, 2, std::vector<PredictionRecord>{preds[0]}));
  CHECK_THROWS(localize(img, 2, 2, std::vector<PredictionRecord>{preds[0], preds[0]}));
}

TEST_CASE("overlapping tiles average per pixel") {
  const Image img(3, 2, 3, 0.0);
  // Patch 2, stride 1: tiles cover x in [0,1] and [1,2]; column 1 sees both.
  const std::vector<PredictionRecord> preds{{"x", 0, {0.0, 0.45, 0.55}}, {"x", 1, {0.0, 0.6, 0.4}}};
  const Localization loc = localize(img, 2, 1, preds);
  CHECK(loc.overlay.at(0, 0, 0) == std::round(0.5 * 255));
  CHECK(loc.overlay.at(1, 0, 2) == std::round(0.5 * 255));
  CHECK(loc.overlay.at(1, 0, 0) == 0.0);
  CHECK(loc.overlay.at(2, 0, 2) == std::round(0.5 * 255));
}
