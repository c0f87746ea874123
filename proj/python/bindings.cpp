#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "seamforge/dataset.hpp"
#include "seamforge/energy.hpp"
#include "seamforge/ensemble.hpp"
#include "seamforge/image.hpp"
#include "seamforge/image_io.hpp"
#include "seamforge/seam.hpp"

namespace py = pybind11;
using namespace seamforge;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) array -> Image.
Image to_image(const DoubleArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw std::invalid_argument("expected an (H, W) or (H, W, C) array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  return Image(w, h, c, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Image& img) {
  std::vector<py::ssize_t> shape{img.height(), img.width()};
  if (img.channels() != 1) shape.push_back(img.channels());
  py::array_t<double> out(shape);
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const EnergyMap& e) {
  py::array_t<double> out({e.height, e.width});
  std::copy(e.values.begin(), e.values.end(), out.mutable_data());
  return out;
}

py::dict record_dict(const SampleRecord& r) {
  return py::dict(py::arg("path") = r.path, py::arg("label") = r.label, py::arg("method") = r.method,
                  py::arg("ratio") = r.ratio, py::arg("split") = r.split,
                  py::arg("source_id") = r.source_id);
}

CorpusSpec spec_from(const std::string& json_text) {
  return corpus_spec_from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_seamforge, m) {
  m.doc() = "Seam-carving retargeting, forensic corpus generation and ensemble evaluation";

  m.def("read_image", [](const std::filesystem::path& p) { return to_array(read_image(p)); });
  m.def("write_image",
        [](const std::filesystem::path& p, const DoubleArray& a, int quality) {
          write_image(p, to_image(a), WriteOptions{quality});
        },
        py::arg("path"), py::arg("image"), py::arg("quality") = 100);
  m.def("to_grayscale", [](const DoubleArray& a) { return to_array(to_grayscale(to_image(a))); });
  m.def("to_lab", [](const DoubleArray& a) { return to_array(to_lab(to_image(a))); });
  m.def("add_awgn", [](const DoubleArray& a, double sigma, std::uint64_t seed) {
    return to_array(add_awgn(to_image(a), sigma, seed));
  });

  m.def("backward_energy", [](const DoubleArray& a) { return to_array(backward_energy(to_image(a))); });
  m.def("absolute_energy", [](const DoubleArray& a) { return to_array(absolute_energy(to_image(a))); });
  m.def("saliency_energy", [](const DoubleArray& a) { return to_array(saliency_energy(to_image(a))); });
  m.def("forward_costs", [](const DoubleArray& a) {
    const ForwardCosts f = forward_costs(to_image(a));
    return py::make_tuple(to_array(f.left), to_array(f.up), to_array(f.right));
  });

  m.def("cumulative_matrix", [](const DoubleArray& a, const std::string& method) {
    const CumulativeMatrix cm = cumulative_matrix(to_image(a), parse_seam_method(method));
    py::array_t<double> out({cm.height, cm.width});
    std::copy(cm.values.begin(), cm.values.end(), out.mutable_data());
    return out;
  });
  m.def("find_optimal_seam", [](const DoubleArray& a, const std::string& method) {
    return find_optimal_seam(to_image(a), parse_seam_method(method)).columns;
  });
  m.def("remove_seam", [](const DoubleArray& a, std::vector<int> seam) {
    return to_array(remove_seam(to_image(a), Seam{std::move(seam)}));
  });
  m.def("insert_seam", [](const DoubleArray& a, std::vector<int> seam) {
    return to_array(insert_seam(to_image(a), Seam{std::move(seam)}));
  });
  m.def("seam_count", &seam_count);
  m.def("retarget",
        [](const DoubleArray& a, const std::string& method, double ratio, const std::string& mode,
           const std::string& axis) {
          RetargetOptions opt{parse_seam_method(method), ratio, parse_retarget_mode(mode), parse_axis(axis)};
          RetargetResult r;
          {
            py::gil_scoped_release release;
            r = retarget(to_image(a), opt);
          }
          std::vector<std::vector<int>> seams;
          for (const auto& s : r.seams) seams.push_back(s.columns);
          return py::make_tuple(to_array(r.image), seams);
        },
        py::arg("image"), py::arg("method") = "avidan", py::arg("ratio") = 0.1,
        py::arg("mode") = "remove", py::arg("axis") = "vertical");

  m.def("_build_corpus", [](const std::string& spec_json) {
    CorpusReport report;
    {
      py::gil_scoped_release release;
      report = build_corpus(spec_from(spec_json));
    }
    py::list records;
    for (const auto& r : report.records) records.append(record_dict(r));
    return py::make_tuple(records, report.skipped, report.manifest_path);
  });
  m.def("_gen_robustness_sets", [](const std::string& spec_json) {
    std::map<std::string, std::vector<SampleRecord>> sets;
    {
      py::gil_scoped_release release;
      sets = gen_robustness_sets(spec_from(spec_json));
    }
    py::dict out;
    for (const auto& [name, records] : sets) {
      py::list l;
      for (const auto& r : records) l.append(record_dict(r));
      out[py::str(name)] = l;
    }
    return out;
  });
  m.def("assign_splits", &assign_splits, py::arg("ids"), py::arg("splits"), py::arg("seed"));

  m.def("sample_patch_coords",
        [](int image_w, int image_h, int w, int h, int theta, std::uint64_t seed) {
          std::vector<std::pair<int, int>> out;
          for (const auto& c : sample_patch_coords(image_w, image_h, w, h, theta, seed)) out.emplace_back(c.rx, c.ry);
          return out;
        },
        py::arg("image_w"), py::arg("image_h"), py::arg("w"), py::arg("h"), py::arg("theta"), py::arg("seed"));
  m.def("aggregate_probs", [](const std::vector<ClassProbs>& probs) {
    std::vector<PredictionRecord> recs;
    for (std::size_t i = 0; i < probs.size(); ++i) recs.push_back({"image", static_cast<int>(i), probs[i]});
    const Aggregate a = aggregate_probs(recs);
    return py::make_tuple(a.probs, a.label);
  });
  m.def("roc_curve", [](const std::vector<double>& scores, const std::vector<bool>& positive) {
    auto flags = std::make_unique<bool[]>(positive.size());
    std::copy(positive.begin(), positive.end(), flags.get());
    const RocCurve c = roc_curve(scores, std::span<const bool>(flags.get(), positive.size()));
    std::vector<std::pair<double, double>> points;
    for (const auto& p : c.points) points.emplace_back(p.fpr, p.tpr);
    return py::make_tuple(points, c.auc);
  });
  m.def("tile_geometry", [](int width, int height, int patch, int stride) {
    const TileGeometry g = tile_geometry(width, height, patch, stride);
    return py::make_tuple(g.cols, g.rows);
  });
}
