#include "seamforge/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seamforge/dataset.hpp"
#include "seamforge/ensemble.hpp"
#include "seamforge/image_io.hpp"
#include "seamforge/seam.hpp"

namespace seamforge {

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  int jobs = 0;
  bool verbose = false;
};

struct RetargetFlags {
  std::string method = "avidan";
  double ratio = 0.0;
  std::string mode = "remove";
  std::string axis = "vertical";
  std::string input;
  std::string output;
  std::string dump_seams;
  std::string visualize;
  std::string dump_energy;
  int quality = 100;
};

struct CorpusFlags {
  std::string spec;
  std::string out_dir;
};

struct SampleFlags {
  int theta = 1;
  int patch = 256;
  std::string manifest;
  std::string out;
  std::string emit_crops;
  std::string split;
};

struct AggregateFlags {
  std::string preds;
  std::string manifest;
  std::string out;
};

struct EvalFlags {
  std::string truth;
  std::string agg;
  std::string report;
};

struct LocalizeFlags {
  std::string image;
  int patch = 128;
  int stride = 128;
  std::string preds;
  std::string overlay;
  std::string grid;
  std::string emit_tiles;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_retarget(const RetargetFlags& f, std::ostream& out) {
  const Image input = read_image(f.input);
  RetargetOptions opts;
  opts.method = parse_seam_method(f.method);
  opts.ratio = f.ratio;
  opts.mode = parse_retarget_mode(f.mode);
  opts.axis = parse_axis(f.axis);
  const RetargetResult result = retarget(input, opts);
  write_image(f.output, result.image, WriteOptions{f.quality});

  if (!f.dump_seams.empty()) {
    nlohmann::json seams = nlohmann::json::array();
    for (const auto& s : result.seams) seams.push_back(s.columns);
    write_text(f.dump_seams, seams.dump() + "\n");
  }
  if (!f.visualize.empty()) {
    write_image(f.visualize, draw_seams(input, result.source_seams, opts.axis));
  }
  if (!f.dump_energy.empty()) {
    const Image oriented = opts.axis == Axis::kHorizontal ? transpose_image(input) : input;
    Image heat = energy_to_image(seam_costs(oriented, opts.method).base);
    if (opts.axis == Axis::kHorizontal) heat = transpose_image(heat);
    write_image(f.dump_energy, heat);
  }
  out << input.width() << "x" << input.height() << " -> " << result.image.width() << "x"
      << result.image.height() << " (" << result.seams.size() << " seams, " << f.method << ")\n";
  return kExitOk;
}

CorpusSpec corpus_spec_for(const CorpusFlags& f, const GlobalFlags& g, bool seed_given,
                           bool jobs_given) {
  CorpusSpec spec = load_corpus_spec(f.spec);
  if (!f.out_dir.empty()) {
    spec.output_dir = f.out_dir;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    spec.output_dir = env;
  }
  if (seed_given) spec.seed = g.seed;
  if (jobs_given) spec.jobs = g.jobs;
  if (spec.output_dir.empty()) throw std::runtime_error("corpus spec has no output_dir");
  return spec;
}

int run_gen_dataset(const CorpusSpec& spec, std::ostream& out, std::ostream& err, bool verbose) {
  const CorpusReport report = build_corpus(spec);
  for (const auto& s : report.skipped) err << "skipped " << s << "\n";
  std::array<int, 3> per_class{0, 0, 0};
  for (const auto& r : report.records) ++per_class[r.label];
  out << report.records.size() << " images (" << per_class[0] << " original, " << per_class[1]
      << " inserted, " << per_class[2] << " removed), " << report.skipped.size()
      << " sources skipped; manifest " << report.manifest_path.string() << "\n";
  if (verbose) err << to_json(spec).dump() << "\n";
  return kExitOk;
}

int run_gen_robustness(const CorpusSpec& spec, std::ostream& out) {
  const auto sets = gen_robustness_sets(spec);
  for (const auto& [name, records] : sets) {
    out << name << ": " << records.size() << " images\n";
  }
  return kExitOk;
}

int run_sample_patches(const SampleFlags& f, const GlobalFlags& g, std::ostream& out) {
  const fs::path manifest(f.manifest);
  const auto records = read_manifest(manifest);
  PatchSamplingOptions opts;
  opts.w = opts.h = f.patch;
  opts.theta = f.theta;
  opts.seed = g.seed;
  opts.split = f.split;
  opts.emit_crops_dir = f.emit_crops;
  const auto patches = sample_patches(records, manifest.parent_path(), opts);
  write_patch_manifest(f.out, patches);
  out << patches.size() << " patches written to " << f.out << "\n";
  return kExitOk;
}

int run_aggregate(const AggregateFlags& f, std::ostream& out) {
  const auto preds = read_predictions(f.preds);
  std::optional<std::vector<PatchRecord>> manifest;
  if (!f.manifest.empty()) manifest = read_patch_manifest(f.manifest);
  const auto aggregates = aggregate_predictions(preds, manifest ? &*manifest : nullptr);
  write_aggregates(f.out, aggregates);
  out << aggregates.size() << " images aggregated from " << preds.size() << " predictions\n";
  return kExitOk;
}

int run_eval(const EvalFlags& f, std::ostream& out) {
  const auto truth = read_manifest(f.truth);
  const auto aggregates = read_aggregates(f.agg);
  const Evaluation evaluation = evaluate(truth, aggregates);
  write_report(f.report, evaluation);
  for (const auto& row : evaluation.rows) {
    out << row.name << "\t" << row.total << "\t" << row.accuracy << "\n";
  }
  return kExitOk;
}

int run_localize(const LocalizeFlags& f, std::ostream& out) {
  const Image img = read_image(f.image);
  if (!f.emit_tiles.empty()) {
    const auto tiles = tile_patches(f.image, img.width(), img.height(), f.patch, f.stride);
    write_patch_manifest(f.emit_tiles, tiles);
    out << tiles.size() << " tiles written to " << f.emit_tiles << "\n";
  }
  if (f.preds.empty()) return kExitOk;
  const auto preds = read_predictions(f.preds);
  const Localization loc = localize(img, f.patch, f.stride, preds);
  if (!f.overlay.empty()) write_image(f.overlay, loc.overlay);
  if (!f.grid.empty()) write_text(f.grid, to_json(loc.map).dump(2) + "\n");
  std::array<int, 3> counts{0, 0, 0};
  for (int label : loc.map.labels) ++counts[label];
  out << loc.map.geometry.cols << "x" << loc.map.geometry.rows << " tiles: " << counts[0]
      << " original, " << counts[1] << " inserted, " << counts[2] << " removed\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seam-carving retargeting and forgery-forensics toolkit", "seamforge"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Read flags from a TOML/INI file (flags take precedence)");

  GlobalFlags global;
  auto* seed_opt = app.add_option("--seed", global.seed, "Global RNG seed")->capture_default_str();
  auto* jobs_opt = app.add_option("--jobs", global.jobs, "Worker threads (0 = all cores)")
                       ->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", global.verbose, "Verbose diagnostics on stderr");

  const std::vector<std::string> methods = {"avidan", "rubinstein", "achanta", "frankovich"};

  RetargetFlags rf;
  auto* retarget_cmd = app.add_subcommand("retarget", "Resize an image by seam removal or insertion");
  retarget_cmd->fallthrough();
  retarget_cmd->add_option("--method", rf.method, "Seam algorithm")
      ->check(CLI::IsMember(methods))
      ->capture_default_str();
  retarget_cmd->add_option("--ratio", rf.ratio, "Seam count as a fraction of the width")
      ->required()
      ->check(CLI::Validator(
          [](const std::string& s) {
            double v = 0.0;
            if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) {
              return std::string("ratio must be in (0,1)");
            }
            return std::string();
          },
          "(0,1)"));
  retarget_cmd->add_option("--mode", rf.mode)->check(CLI::IsMember({"remove", "insert"}))->capture_default_str();
  retarget_cmd->add_option("--axis", rf.axis)
      ->check(CLI::IsMember({"vertical", "horizontal"}))
      ->capture_default_str();
  retarget_cmd->add_option("--quality", rf.quality, "JPEG quality for the output")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  retarget_cmd->add_option("--dump-seams", rf.dump_seams, "Write seams as a JSON array of column arrays");
  retarget_cmd->add_option("--visualize", rf.visualize, "Write the input with seams painted red");
  retarget_cmd->add_option("--dump-energy", rf.dump_energy, "Write the base energy map as an 8-bit PNG");
  retarget_cmd->add_option("IN", rf.input)->required()->check(CLI::ExistingFile);
  retarget_cmd->add_option("OUT", rf.output)->required();

  CorpusFlags dataset_flags;
  auto* dataset_cmd = app.add_subcommand("gen-dataset", "Build the original/inserted/removed corpus");
  dataset_cmd->fallthrough();
  dataset_cmd->add_option("--spec", dataset_flags.spec, "Corpus spec JSON")->required()->check(CLI::ExistingFile);
  dataset_cmd->add_option("--out-dir", dataset_flags.out_dir, "Override the spec's output_dir");

  CorpusFlags robust_flags;
  auto* robust_cmd = app.add_subcommand("gen-robustness", "Build the robustness test sets");
  robust_cmd->fallthrough();
  robust_cmd->add_option("--spec", robust_flags.spec, "Corpus spec JSON")->required()->check(CLI::ExistingFile);
  robust_cmd->add_option("--out-dir", robust_flags.out_dir, "Override the spec's output_dir");

  SampleFlags sf;
  auto* sample_cmd = app.add_subcommand("sample-patches", "Sample ensemble patch coordinates");
  sample_cmd->fallthrough();
  sample_cmd->add_option("--theta", sf.theta, "Patches per image")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--patch", sf.patch, "Square patch size")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--manifest", sf.manifest, "Sample manifest (JSONL)")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--out", sf.out, "Patch manifest to write")->required();
  sample_cmd->add_option("--emit-crops", sf.emit_crops, "Also write every crop as PNG here");
  sample_cmd->add_option("--split", sf.split, "Only records of this split")
      ->check(CLI::IsMember({"train", "val", "test"}));

  AggregateFlags af;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Average patch probabilities per image");
  aggregate_cmd->fallthrough();
  aggregate_cmd->add_option("--preds", af.preds, "Prediction records (JSONL)")->required()->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--manifest", af.manifest, "Patch manifest to check coverage against")
      ->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--out", af.out, "Aggregates to write (JSONL)")->required();

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy, confusion matrix and ROC/AUC");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--truth", ef.truth, "Sample manifest with labels")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--agg", ef.agg, "Aggregates (JSONL)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", ef.report, "Report directory")->required();

  LocalizeFlags lf;
  auto* localize_cmd = app.add_subcommand("localize", "Tile-wise manipulation map and overlay");
  localize_cmd->fallthrough();
  localize_cmd->add_option("--image", lf.image)->required()->check(CLI::ExistingFile);
  localize_cmd->add_option("--patch", lf.patch)->check(CLI::PositiveNumber)->capture_default_str();
  localize_cmd->add_option("--stride", lf.stride)->check(CLI::PositiveNumber)->capture_default_str();
  localize_cmd->add_option("--preds", lf.preds, "Tile predictions (JSONL)")->check(CLI::ExistingFile);
  localize_cmd->add_option("--overlay", lf.overlay, "Overlay image to write");
  localize_cmd->add_option("--grid", lf.grid, "Tile grid JSON to write");
  localize_cmd->add_option("--emit-tiles", lf.emit_tiles, "Write the tile patch manifest");

  if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->get_name() == args.front();
    if (!known) {
      err << "seamforge: unknown command '" << args.front() << "'\n" << app.help();
      return kExitUsage;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (localize_cmd->parsed() && lf.preds.empty() && lf.emit_tiles.empty()) {
      throw CLI::ValidationError("localize", "needs --preds and/or --emit-tiles");
    }
    if (localize_cmd->parsed() && !lf.preds.empty() && lf.overlay.empty() && lf.grid.empty()) {
      throw CLI::ValidationError("localize", "--preds needs --overlay or --grid");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "seamforge: " << e.what() << "\n";
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitUsage;
  }

  try {
    const bool seed_given = seed_opt->count() > 0;
    const bool jobs_given = jobs_opt->count() > 0;
    if (retarget_cmd->parsed()) return run_retarget(rf, out);
    if (dataset_cmd->parsed()) {
      return run_gen_dataset(corpus_spec_for(dataset_flags, global, seed_given, jobs_given), out,
                             err, global.verbose);
    }
    if (robust_cmd->parsed()) {
      return run_gen_robustness(corpus_spec_for(robust_flags, global, seed_given, jobs_given), out);
    }
    if (sample_cmd->parsed()) return run_sample_patches(sf, global, out);
    if (aggregate_cmd->parsed()) return run_aggregate(af, out);
    if (eval_cmd->parsed()) return run_eval(ef, out);
    if (localize_cmd->parsed()) return run_localize(lf, out);
  } catch (const std::exception& e) {
    err << "seamforge: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace seamforge
