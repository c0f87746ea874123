#include "seamforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "seamforge/image_io.hpp"

namespace seamforge {

namespace {

constexpr const char* kSplitNames[3] = {"train", "val", "test"};

std::string file_extension(const std::string& format) {
  if (format == "jpeg" || format == "jpg") return ".jpg";
  if (format == "png") return ".png";
  if (format == "bmp") return ".bmp";
  throw std::invalid_argument("unsupported save format '" + format + "'");
}

// "10" for 0.1, "4" for 0.04, "12.5" for 0.125.
std::string ratio_tag(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%g", std::round(ratio * 1e6) / 1e4);
  return buf;
}

std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sigma_%g", sigma);
  return buf;
}

bool is_image_file(const fs::path& p) {
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp",
                                              ".tif", ".tiff", ".pgm", ".ppm"};
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return kExt.count(ext) > 0;
}

struct Original {
  std::string id;
  fs::path path;
};

struct Discovery {
  std::vector<Original> originals;
  std::vector<std::string> skipped;
};

// Candidate sources sorted by file name; duplicate stems keep the first.
std::vector<Original> list_sources(const fs::path& dir, std::vector<std::string>& skipped) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("source directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Original> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    if (!seen.insert(id).second) {
      skipped.push_back(f.filename().string() + ": duplicate id '" + id + "'");
      continue;
    }
    out.push_back({id, f});
  }
  return out;
}

// Reads and center-crops one source; returns an empty image with a reason on failure.
Image load_base(const Original& original, const CorpusSpec& spec, std::string& reason) {
  Image img;
  try {
    img = read_image(original.path);
  } catch (const std::exception& e) {
    reason = original.path.filename().string() + ": " + e.what();
    return {};
  }
  if (img.width() < spec.width || img.height() < spec.height) {
    reason = original.path.filename().string() + ": undersized " + std::to_string(img.width()) +
             "x" + std::to_string(img.height());
    return {};
  }
  return center_crop(img, spec.width, spec.height);
}

Discovery discover_originals(const CorpusSpec& spec) {
  Discovery d;
  const auto candidates = list_sources(spec.source_dir, d.skipped);
  for (const auto& c : candidates) {
    std::string reason;
    try {
      const ImageShape shape = probe_image(c.path);
      if (shape.width < spec.width || shape.height < spec.height) {
        reason = c.path.filename().string() + ": undersized " + std::to_string(shape.width) +
                 "x" + std::to_string(shape.height);
      }
    } catch (const std::exception& e) {
      reason = c.path.filename().string() + ": " + e.what();
    }
    if (reason.empty()) {
      d.originals.push_back(c);
    } else {
      d.skipped.push_back(reason);
    }
  }
  return d;
}

struct Variant {
  SampleClass label;
  std::string method;
  double ratio;
  Image image;
};

// Originals first, then for each method and ratio the removed and inserted images.
void for_each_variant(const Image& base, std::span<const SeamMethod> methods,
                      std::span<const double> ratios, bool include_original,
                      const std::function<void(const Variant&)>& sink) {
  if (include_original) sink({SampleClass::kOriginal, "none", 0.0, base});
  for (SeamMethod method : methods) {
    if (ratios.empty()) continue;
    auto pairs = retarget_both(base, method, ratios);
    for (auto& pair : pairs) {
      sink({SampleClass::kRemoved, std::string(to_string(method)), pair.ratio,
            std::move(pair.removed)});
      sink({SampleClass::kInserted, std::string(to_string(method)), pair.ratio,
            std::move(pair.inserted)});
    }
  }
}

std::string variant_path(const Variant& v, const std::string& id, const std::string& ext) {
  switch (v.label) {
    case SampleClass::kOriginal: return "original/" + id + ext;
    case SampleClass::kInserted:
      return "inserted/" + v.method + "/" + ratio_tag(v.ratio) + "/" + id + ext;
    case SampleClass::kRemoved:
      return "removed/" + v.method + "/" + ratio_tag(v.ratio) + "/" + id + ext;
  }
  return id + ext;
}

SampleRecord make_record(const Variant& v, const std::string& path, const std::string& id,
                         const std::string& split) {
  return {path, static_cast<int>(v.label), v.method, v.ratio, split, id};
}

template <typename T>
std::vector<T> json_list(const nlohmann::json& j, const char* key) {
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

void validate(const CorpusSpec& spec) {
  if (spec.width < 3 || spec.height < 3) {
    throw std::invalid_argument("corpus spec: target size must be at least 3x3");
  }
  if (spec.ratios.empty()) throw std::invalid_argument("corpus spec: ratios must not be empty");
  for (double r : spec.ratios) {
    if (!(r > 0.0 && r < 1.0)) {
      throw std::invalid_argument("corpus spec: ratio " + std::to_string(r) + " not in (0,1)");
    }
  }
  for (double r : spec.unseen_ratios) {
    if (!(r > 0.0 && r < 1.0)) {
      throw std::invalid_argument("corpus spec: unseen ratio " + std::to_string(r) +
                                  " not in (0,1)");
    }
  }
  for (double s : spec.awgn_sigmas) {
    if (s < 0.0) throw std::invalid_argument("corpus spec: AWGN sigma must be >= 0");
  }
  if (spec.methods.empty()) throw std::invalid_argument("corpus spec: methods must not be empty");
  file_extension(spec.format);
  if (spec.quality < 1 || spec.quality > 100) {
    throw std::invalid_argument("corpus spec: quality must be in 1..100");
  }
  double total = 0.0;
  for (double s : spec.splits) {
    if (s < 0.0) throw std::invalid_argument("corpus spec: split ratios must be >= 0");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("corpus spec: split ratios must sum to 1");
  }
}

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "source_dir", "output_dir", "width",  "height", "ratios",        "methods",
      "format",     "quality",    "splits", "seed",   "unseen_ratios", "awgn_sigmas",
      "jobs"};
  if (!j.is_object()) throw std::invalid_argument("corpus spec: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw std::invalid_argument("corpus spec: unknown key '" + key + "'");
  }
  CorpusSpec spec;
  if (j.contains("source_dir")) spec.source_dir = j["source_dir"].get<std::string>();
  if (j.contains("output_dir")) spec.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("width")) spec.width = j["width"].get<int>();
  if (j.contains("height")) spec.height = j["height"].get<int>();
  if (j.contains("ratios")) spec.ratios = json_list<double>(j, "ratios");
  if (j.contains("methods")) {
    spec.methods.clear();
    for (const auto& name : json_list<std::string>(j, "methods")) {
      spec.methods.push_back(parse_seam_method(name));
    }
  }
  if (j.contains("format")) spec.format = j["format"].get<std::string>();
  if (j.contains("quality")) spec.quality = j["quality"].get<int>();
  if (j.contains("splits")) {
    const auto s = json_list<double>(j, "splits");
    if (s.size() != 3) throw std::invalid_argument("corpus spec: splits needs 3 entries");
    spec.splits = {s[0], s[1], s[2]};
  }
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("jobs")) spec.jobs = j["jobs"].get<int>();
  if (j.contains("unseen_ratios")) spec.unseen_ratios = json_list<double>(j, "unseen_ratios");
  if (j.contains("awgn_sigmas")) spec.awgn_sigmas = json_list<double>(j, "awgn_sigmas");
  validate(spec);
  return spec;
}

nlohmann::json to_json(const CorpusSpec& spec) {
  std::vector<std::string> methods;
  for (SeamMethod m : spec.methods) methods.emplace_back(to_string(m));
  return {{"source_dir", spec.source_dir.string()},
          {"output_dir", spec.output_dir.string()},
          {"width", spec.width},
          {"height", spec.height},
          {"ratios", spec.ratios},
          {"methods", methods},
          {"format", spec.format},
          {"quality", spec.quality},
          {"splits", spec.splits},
          {"seed", spec.seed},
          {"jobs", spec.jobs},
          {"unseen_ratios", spec.unseen_ratios},
          {"awgn_sigmas", spec.awgn_sigmas}};
}

CorpusSpec load_corpus_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid corpus spec " + path.string() + ": " + e.what());
  }
  CorpusSpec spec = corpus_spec_from_json(j);
  // Relative directories resolve against the spec file's location.
  const fs::path base = path.parent_path();
  if (spec.source_dir.is_relative()) spec.source_dir = base / spec.source_dir;
  if (spec.output_dir.is_relative()) spec.output_dir = base / spec.output_dir;
  return spec;
}

nlohmann::ordered_json to_json(const SampleRecord& r) {
  nlohmann::ordered_json j;
  j["path"] = r.path;
  j["label"] = r.label;
  j["method"] = r.method;
  j["ratio"] = r.ratio;
  j["split"] = r.split;
  j["source_id"] = r.source_id;
  return j;
}

SampleRecord sample_record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.path = j.at("path").get<std::string>();
  r.label = j.at("label").get<int>();
  if (r.label < 0 || r.label > 2) {
    throw std::invalid_argument("manifest: label out of range for " + r.path);
  }
  r.method = j.value("method", std::string("none"));
  r.ratio = j.value("ratio", 0.0);
  r.split = j.value("split", std::string());
  r.source_id = j.value("source_id", fs::path(r.path).stem().string());
  return r;
}

namespace {

template <typename Record, typename ToJson>
void write_jsonl(const fs::path& path, const std::vector<Record>& records, ToJson to_json_fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << to_json_fn(r).dump() << '\n';
}

template <typename Record, typename FromJson>
std::vector<Record> read_jsonl(const fs::path& path, FromJson from_json_fn) {
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

}  // namespace

void write_manifest(const fs::path& path, const std::vector<SampleRecord>& records) {
  write_jsonl(path, records, [](const SampleRecord& r) { return to_json(r); });
}

std::vector<SampleRecord> read_manifest(const fs::path& path) {
  return read_jsonl<SampleRecord>(path, sample_record_from_json);
}

std::map<std::string, std::string> assign_splits(std::vector<std::string> ids,
                                                 const std::array<double, 3>& splits,
                                                 std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const auto n = static_cast<long long>(ids.size());
  const long long n_train = std::min(n, std::llround(splits[0] * n));
  const long long n_val = std::min(n - n_train, std::llround(splits[1] * n));
  std::map<std::string, std::string> out;
  for (long long i = 0; i < n; ++i) {
    const int s = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
    out[ids[i]] = kSplitNames[s];
  }
  return out;
}

Image center_crop(const Image& img, int width, int height) {
  if (img.width() < width || img.height() < height) {
    throw std::invalid_argument("center_crop: image smaller than target");
  }
  return crop(img, (img.width() - width) / 2, (img.height() - height) / 2, width, height);
}

Image crop_topleft(const Image& img, int width, int height) {
  if (img.width() < width || img.height() < height) {
    throw std::invalid_argument("crop_topleft: image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " smaller than " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  return crop(img, 0, 0, width, height);
}

CorpusReport build_corpus(const CorpusSpec& spec) {
  validate(spec);
  CorpusReport report;
  const auto candidates = list_sources(spec.source_dir, report.skipped);
  const std::string ext = file_extension(spec.format);
  const WriteOptions write_opts{spec.quality};

  // Per-original record lists; filled in parallel, merged in id order.
  std::vector<std::vector<SampleRecord>> per_original(candidates.size());
  std::vector<std::string> reasons(candidates.size());
  detail::parallel_for(candidates.size(), spec.jobs, [&](std::size_t i) {
    const Original& original = candidates[i];
    const Image base = load_base(original, spec, reasons[i]);
    if (base.empty()) return;
    for_each_variant(base, spec.methods, spec.ratios, true, [&](const Variant& v) {
      const std::string rel = variant_path(v, original.id, ext);
      write_image(spec.output_dir / rel, v.image, write_opts);
      per_original[i].push_back(make_record(v, rel, original.id, ""));
    });
  });

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (reasons[i].empty()) {
      ids.push_back(candidates[i].id);
    } else {
      report.skipped.push_back(reasons[i]);
    }
  }
  const auto split_of = assign_splits(ids, spec.splits, spec.seed);
  for (auto& records : per_original) {
    for (auto& r : records) {
      r.split = split_of.at(r.source_id);
      report.records.push_back(std::move(r));
    }
  }
  report.manifest_path = spec.output_dir / "manifest.jsonl";
  write_manifest(report.manifest_path, report.records);
  return report;
}

std::map<std::string, std::vector<SampleRecord>> gen_robustness_sets(const CorpusSpec& spec) {
  validate(spec);
  const Discovery discovery = discover_originals(spec);
  std::vector<std::string> ids;
  for (const auto& o : discovery.originals) ids.push_back(o.id);
  const auto split_of = assign_splits(ids, spec.splits, spec.seed);
  std::vector<Original> test;
  for (const auto& o : discovery.originals) {
    if (split_of.at(o.id) == "test") test.push_back(o);
  }

  const fs::path root = spec.output_dir / "robustness";
  const std::string ext = file_extension(spec.format);
  const WriteOptions write_opts{spec.quality};
  std::vector<SeamMethod> unseen_methods;
  for (SeamMethod m : all_seam_methods()) {
    if (std::find(spec.methods.begin(), spec.methods.end(), m) == spec.methods.end()) {
      unseen_methods.push_back(m);
    }
  }

  // set name -> per-test-original records
  std::map<std::string, std::vector<std::vector<SampleRecord>>> sets;
  auto touch = [&](const std::string& name) { sets[name].resize(test.size()); };
  touch("unseen_ratios");
  touch("zero_ratio");
  touch("bmp");
  for (double sigma : spec.awgn_sigmas) touch("awgn/" + sigma_tag(sigma));
  for (SeamMethod m : unseen_methods) touch("methods/" + std::string(to_string(m)));

  detail::parallel_for(test.size(), spec.jobs, [&](std::size_t i) {
    const Original& original = test[i];
    std::string reason;
    const Image base = load_base(original, spec, reason);
    if (base.empty()) throw std::runtime_error(reason);
    auto emit = [&](const std::string& set, const Variant& v, const std::string& rel,
                    const Image& pixels, const WriteOptions& opts) {
      write_image(root / set / rel, pixels, opts);
      sets.at(set)[i].push_back(make_record(v, rel, original.id, "test"));
    };

    // Unseen (small) ratios with the training methods.
    for_each_variant(base, spec.methods, spec.unseen_ratios, true, [&](const Variant& v) {
      emit("unseen_ratios", v, variant_path(v, original.id, ext), v.image, write_opts);
    });

    // 0%: single- and double-compressed originals, both class 0.
    {
      const Variant single{SampleClass::kOriginal, "none", 0.0, base};
      emit("zero_ratio", single, "single/" + original.id + ".jpg", base, write_opts);
      const Image once = jpeg_roundtrip(base, spec.quality);
      emit("zero_ratio", single, "double/" + original.id + ".jpg", once, write_opts);
    }

    // The mixed test set, pre-compression: BMP copies and AWGN-perturbed decodes.
    for_each_variant(base, spec.methods, spec.ratios, true, [&](const Variant& v) {
      emit("bmp", v, variant_path(v, original.id, ".bmp"), v.image, write_opts);
      const Image decoded = spec.format == "jpeg" || spec.format == "jpg"
                                ? jpeg_roundtrip(v.image, spec.quality)
                                : v.image;
      for (double sigma : spec.awgn_sigmas) {
        const std::string set = "awgn/" + sigma_tag(sigma);
        const std::string rel = variant_path(v, original.id, ".png");
        const Image noisy = add_awgn(decoded, sigma, derive_seed(spec.seed, set + "/" + rel));
        emit(set, v, rel, noisy, write_opts);
      }
    });

    // Methods not used for training.
    for (SeamMethod m : unseen_methods) {
      const std::string set = "methods/" + std::string(to_string(m));
      const SeamMethod one[] = {m};
      for_each_variant(base, one, spec.ratios, true, [&](const Variant& v) {
        emit(set, v, variant_path(v, original.id, ext), v.image, write_opts);
      });
    }
  });

  std::map<std::string, std::vector<SampleRecord>> out;
  for (auto& [name, per_original] : sets) {
    auto& merged = out[name];
    for (auto& records : per_original) {
      for (auto& r : records) merged.push_back(std::move(r));
    }
    write_manifest(root / name / "manifest.jsonl", merged);
  }
  return out;
}

std::vector<SampleRecord> balanced_view(const std::vector<SampleRecord>& records) {
  // split -> distinct (method, ratio) among class-1 records
  std::map<std::string, std::set<std::pair<std::string, double>>> keys;
  for (const auto& r : records) {
    if (r.label == static_cast<int>(SampleClass::kInserted)) keys[r.split].insert({r.method, r.ratio});
  }
  std::vector<SampleRecord> out;
  for (const auto& r : records) {
    if (r.label != static_cast<int>(SampleClass::kOriginal)) {
      out.push_back(r);
      continue;
    }
    const auto it = keys.find(r.split);
    if (it == keys.end()) {
      out.push_back(r);
      continue;
    }
    for (const auto& [method, ratio] : it->second) {
      SampleRecord copy = r;
      copy.method = method;
      copy.ratio = ratio;
      out.push_back(std::move(copy));
    }
  }
  return out;
}

std::vector<PatchCoord> sample_patch_coords(int image_w, int image_h, int w, int h, int theta,
                                            std::uint64_t seed) {
  if (w < 1 || h < 1) throw std::invalid_argument("sample_patch_coords: patch size must be >= 1");
  if (theta < 1) throw std::invalid_argument("sample_patch_coords: theta must be >= 1");
  if (image_w < w || image_h < h) {
    throw std::invalid_argument("sample_patch_coords: image " + std::to_string(image_w) + "x" +
                                std::to_string(image_h) + " smaller than patch " +
                                std::to_string(w) + "x" + std::to_string(h));
  }
  std::vector<PatchCoord> coords;
  coords.reserve(theta);
  coords.push_back({0, 0});
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dx(0, image_w - w);
  std::uniform_int_distribution<int> dy(0, image_h - h);
  for (int i = 1; i < theta; ++i) {
    const int rx = dx(rng);
    const int ry = dy(rng);
    coords.push_back({rx, ry});
  }
  return coords;
}

nlohmann::ordered_json to_json(const PatchRecord& r) {
  nlohmann::ordered_json j;
  j["image_id"] = r.image_id;
  j["rx"] = r.rx;
  j["ry"] = r.ry;
  j["w"] = r.w;
  j["h"] = r.h;
  j["patch_index"] = r.patch_index;
  return j;
}

PatchRecord patch_record_from_json(const nlohmann::json& j) {
  return {j.at("image_id").get<std::string>(), j.at("rx").get<int>(), j.at("ry").get<int>(),
          j.at("w").get<int>(),                j.at("h").get<int>(),  j.at("patch_index").get<int>()};
}

void write_patch_manifest(const fs::path& path, const std::vector<PatchRecord>& records) {
  write_jsonl(path, records, [](const PatchRecord& r) { return to_json(r); });
}

std::vector<PatchRecord> read_patch_manifest(const fs::path& path) {
  return read_jsonl<PatchRecord>(path, patch_record_from_json);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) {
  // FNV-1a over the id, folded into the seed, finished with splitmix64.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<PatchRecord> sample_patches(const std::vector<SampleRecord>& records,
                                        const fs::path& base_dir,
                                        const PatchSamplingOptions& options) {
  std::vector<PatchRecord> out;
  for (const auto& r : records) {
    if (!options.split.empty() && r.split != options.split) continue;
    const Image img = read_image(base_dir / r.path);
    const auto coords = sample_patch_coords(img.width(), img.height(), options.w, options.h,
                                            options.theta, derive_seed(options.seed, r.path));
    for (std::size_t i = 0; i < coords.size(); ++i) {
      PatchRecord p{r.path, coords[i].rx, coords[i].ry, options.w, options.h, static_cast<int>(i)};
      if (!options.emit_crops_dir.empty()) {
        std::string stem = fs::path(r.path).replace_extension().string();
        std::replace(stem.begin(), stem.end(), '/', '_');
        write_image(options.emit_crops_dir / (stem + "_p" + std::to_string(i) + ".png"),
                    crop(img, p.rx, p.ry, p.w, p.h));
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace seamforge
