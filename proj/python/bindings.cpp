#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hodet/cli.hpp"
#include "hodet/data.hpp"
#include "hodet/errors.hpp"
#include "hodet/evaluation.hpp"
#include "hodet/trainer.hpp"

namespace py = pybind11;
using namespace hodet;

namespace {

py::array_t<float> image_array(const ImageRaster& img) {
  py::array_t<float> out({img.height(), img.width(), img.channels()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

ImageRaster image_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 && arr.ndim() != 3) throw InvalidImage("image array must be (H, W) or (H, W, C)");
  const int h = static_cast<int>(arr.shape(0)), w = static_cast<int>(arr.shape(1));
  const int c = arr.ndim() == 3 ? static_cast<int>(arr.shape(2)) : 1;
  return ImageRaster(w, h, c, std::vector<float>(arr.data(), arr.data() + arr.size()));
}

EnvConfig env_config(const std::string& scheme, const std::string& extractor, int max_steps) {
  EnvConfig env;
  env.scheme = parse_scheme(scheme);
  env.extractor = parse_extractor(extractor);
  env.max_steps = max_steps;
  return env;
}

py::dict curve_dict(const PRCurve& c) {
  std::vector<double> precision, recall, scores;
  for (const auto& p : c.points) {
    precision.push_back(p.precision);
    recall.push_back(p.recall);
    scores.push_back(p.score);
  }
  py::dict d;
  d["average_precision"] = c.average_precision;
  d["precision"] = precision;
  d["recall"] = recall;
  d["scores"] = scores;
  d["num_ground_truth"] = c.num_ground_truth;
  d["true_positives"] = c.true_positives;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core of the hierarchical Q-learning detector";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<Box>(m, "Box")
      .def(py::init<double, double, double, double>(), py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
      .def_property_readonly("x0", &Box::x0)
      .def_property_readonly("y0", &Box::y0)
      .def_property_readonly("x1", &Box::x1)
      .def_property_readonly("y1", &Box::y1)
      .def_property_readonly("width", &Box::width)
      .def_property_readonly("height", &Box::height)
      .def_property_readonly("area", &Box::area)
      .def("contains", &Box::contains)
      .def("__eq__", [](const Box& a, const Box& b) { return a == b; })
      .def("__repr__", [](const Box& b) {
        std::ostringstream os;
        os << "Box" << b;
        return os.str();
      });

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init<Box, std::string>(), py::arg("box"), py::arg("label") = "object")
      .def_readonly("box", &GroundTruth::box)
      .def_readonly("label", &GroundTruth::label);

  py::class_<Scene>(m, "Scene")
      .def(py::init([](std::string id, const py::array_t<float, py::array::c_style | py::array::forcecast>& image,
                       std::vector<GroundTruth> objects) {
             Scene s{std::move(id), image_from_array(image), std::move(objects)};
             s.validate();
             return s;
           }),
           py::arg("id"), py::arg("image"), py::arg("objects"))
      .def_readonly("id", &Scene::id)
      .def_readonly("objects", &Scene::objects)
      .def_property_readonly("image", [](const Scene& s) { return image_array(s.image); });

  py::class_<QNetwork>(m, "QNetwork")
      .def_property_readonly("sizes", &QNetwork::sizes)
      .def("save", [](const QNetwork& n, const std::string& path) { save_file(n, path); })
      .def("infer", [](const QNetwork& n, const std::vector<float>& x) { return n.infer(x); });

  m.def("load_checkpoint", [](const std::string& path) { return load_file(path); }, py::arg("path"));

  m.def("iou", &iou);
  m.def(
      "children",
      [](const Box& b, const std::string& scheme) {
        const auto kids = children(b, parse_scheme(scheme));
        return std::vector<Box>(kids.begin(), kids.end());
      },
      py::arg("box"), py::arg("scheme") = "overlapped");
  m.def(
      "coverage_recall",
      [](const std::string& scheme, const Box& image, int max_steps, const std::vector<Box>& boxes) {
        return coverage_recall(parse_scheme(scheme), image, max_steps, boxes);
      },
      py::arg("scheme"), py::arg("image"), py::arg("max_steps"), py::arg("boxes"));

  m.def(
      "generate",
      [](int num_scenes, int image_size, const std::string& placement, const std::string& scheme, int min_depth,
         int max_depth, double min_size, double max_size, int min_objects, int max_objects, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.num_scenes = num_scenes;
        spec.image_size = image_size;
        spec.placement = parse_placement(placement);
        spec.scheme = parse_scheme(scheme);
        spec.min_depth = min_depth;
        spec.max_depth = max_depth;
        spec.min_size = min_size;
        spec.max_size = max_size;
        spec.min_objects = min_objects;
        spec.max_objects = max_objects;
        spec.seed = seed;
        return generate(spec);
      },
      py::arg("num_scenes") = 100, py::arg("image_size") = 64, py::arg("placement") = "aligned",
      py::arg("scheme") = "overlapped", py::arg("min_depth") = 1, py::arg("max_depth") = 3, py::arg("min_size") = 0.1,
      py::arg("max_size") = 0.9, py::arg("min_objects") = 1, py::arg("max_objects") = 1, py::arg("seed") = 1);

  m.def(
      "train",
      [](const std::vector<Scene>& scenes, int epochs, int hidden, double learning_rate, std::size_t batch_size,
         const std::string& scheme, const std::string& extractor, std::uint64_t seed,
         const std::string& checkpoint_dir) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.hidden = hidden;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.env = env_config(scheme, extractor, cfg.env.max_steps);
        cfg.seed = seed;
        cfg.checkpoint_dir = checkpoint_dir;
        TrainResult r = [&] {
          py::gil_scoped_release release;
          return train(scenes, cfg);
        }();
        std::vector<py::dict> log;
        for (const auto& e : r.log) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["epsilon"] = e.epsilon;
          d["mean_reward"] = e.mean_reward;
          d["mean_terminal_reward"] = e.mean_terminal_reward;
          d["mean_steps"] = e.mean_steps;
          d["loss"] = e.loss;
          log.push_back(d);
        }
        return py::make_tuple(std::move(r.net), log);
      },
      py::arg("scenes"), py::arg("epochs") = 50, py::arg("hidden") = 128, py::arg("learning_rate") = 1e-4,
      py::arg("batch_size") = 100, py::arg("scheme") = "overlapped", py::arg("extractor") = "zoom",
      py::arg("seed") = 1, py::arg("checkpoint_dir") = "");

  m.def(
      "evaluate_agent",
      [](const std::vector<Scene>& scenes, const QNetwork& net, const std::string& scheme,
         const std::string& extractor, int max_steps) {
        const EvalResult r = evaluate_agent(scenes, net, env_config(scheme, extractor, max_steps));
        py::dict d = curve_dict(r.curve);
        std::map<int, std::size_t> hist = steps_histogram(r.traces);
        d["steps_histogram"] = hist;
        return d;
      },
      py::arg("scenes"), py::arg("net"), py::arg("scheme") = "overlapped", py::arg("extractor") = "zoom",
      py::arg("max_steps") = 8);

  m.def(
      "random_baseline",
      [](const std::vector<Scene>& scenes, const std::string& scheme, int max_steps, std::uint64_t seed) {
        Rng rng(seed);
        return curve_dict(random_baseline(scenes, env_config(scheme, "zoom", max_steps), rng).curve);
      },
      py::arg("scenes"), py::arg("scheme") = "overlapped", py::arg("max_steps") = 8, py::arg("seed") = 1);

  m.def(
      "oracle_upper_bound",
      [](const std::vector<Scene>& scenes, const std::string& scheme, int max_steps) {
        return curve_dict(oracle_upper_bound(scenes, parse_scheme(scheme), max_steps));
      },
      py::arg("scenes"), py::arg("scheme") = "overlapped", py::arg("max_steps") = 8);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
