#include "hodet/data.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "hodet/errors.hpp"
#include "hodet/evaluation.hpp"
#include "hodet/image.hpp"

namespace hodet {

namespace pt = boost::property_tree;

std::string_view to_string(Placement p) { return p == Placement::Uniform ? "uniform" : "aligned"; }

Placement parse_placement(std::string_view name) {
  if (name == "uniform") return Placement::Uniform;
  if (name == "aligned" || name == "hierarchy-aligned") return Placement::HierarchyAligned;
  throw ConfigError("unknown placement '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  if (image_size < ImageRaster::kMinSide) throw ConfigError("image_size must be at least 16");
  if (num_scenes < 1) throw ConfigError("num_scenes must be at least 1");
  if (min_objects < 1 || max_objects < min_objects) throw ConfigError("object count range is invalid");
  if (!(min_size > 0.0 && min_size <= max_size && max_size <= 1.0)) {
    throw ConfigError("object size fractions must satisfy 0 < min <= max <= 1");
  }
  if (min_depth < 0 || max_depth < min_depth) throw ConfigError("depth range is invalid");
  if (!(noise >= 0.0 && noise <= 1.0) || !(foreground >= 0.0 && foreground <= 1.0)) {
    throw ConfigError("noise and foreground intensities must lie in [0, 1]");
  }
}

namespace {

std::uint8_t quantise(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

bool inside(const Box& b, double x, double y) { return x >= b.x0() && x < b.x1() && y >= b.y0() && y < b.y1(); }

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::filesystem::path& file, const std::string& field) {
  const std::string trimmed = [&] {
    const auto b = text.find_first_not_of(" \t\r\n");
    const auto e = text.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : text.substr(b, e - b + 1);
  }();
  double v = 0.0;
  const auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
  if (trimmed.empty() || res.ec != std::errc() || res.ptr != trimmed.data() + trimmed.size() || !std::isfinite(v)) {
    throw ParseError(file.string() + ": field " + field + " has malformed value '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<Scene> generate(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.image_size;
  const Box image_box(0.0, 0.0, n, n);

  // Candidate nodes per depth for aligned placement.
  std::vector<std::vector<Box>> aligned(spec.max_depth + 1);
  int min_side = 0, max_side = 0;
  if (spec.placement == Placement::HierarchyAligned) {
    const auto nodes = hierarchy_nodes(image_box, spec.scheme, spec.max_depth);
    std::size_t begin = 0, level = 1;
    bool any = false;
    for (int d = 0; d <= spec.max_depth; ++d, begin += level, level *= kNumChildren) {
      if (d < spec.min_depth) continue;
      for (std::size_t i = begin; i < begin + level; ++i) {
        const double frac = nodes[i].width() / n;
        if (frac >= spec.min_size - 1e-12 && frac <= spec.max_size + 1e-12) aligned[d].push_back(nodes[i]);
      }
      any = any || !aligned[d].empty();
    }
    if (!any) throw InfeasiblePlacement("no hierarchy node at the requested depths fits the size range");
  } else {
    min_side = std::max(1, static_cast<int>(std::ceil(spec.min_size * n - 1e-9)));
    max_side = std::min(n, static_cast<int>(std::floor(spec.max_size * n + 1e-9)));
    if (min_side > max_side) throw InfeasiblePlacement("object size range admits no integer side length");
  }
  std::vector<int> usable_depths;
  for (int d = spec.min_depth; d <= spec.max_depth; ++d) {
    if (spec.placement == Placement::HierarchyAligned && !aligned[d].empty()) usable_depths.push_back(d);
  }

  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count_dist(spec.min_objects, spec.max_objects);

  std::vector<Scene> scenes;
  scenes.reserve(spec.num_scenes);
  for (int s = 0; s < spec.num_scenes; ++s) {
    const int count = count_dist(rng);
    std::vector<GroundTruth> objects;
    for (int k = 0; k < count; ++k) {
      if (spec.placement == Placement::HierarchyAligned) {
        std::uniform_int_distribution<std::size_t> depth_pick(0, usable_depths.size() - 1);
        const auto& pool = aligned[usable_depths[depth_pick(rng)]];
        std::uniform_int_distribution<std::size_t> node_pick(0, pool.size() - 1);
        objects.push_back({pool[node_pick(rng)], spec.label});
      } else {
        std::uniform_int_distribution<int> side(min_side, max_side);
        const int w = side(rng), h = side(rng);
        std::uniform_int_distribution<int> px(0, n - w), py(0, n - h);
        const int x0 = px(rng), y0 = py(rng);
        objects.push_back({Box(x0, y0, x0 + w, y0 + h), spec.label});
      }
    }

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double noise = spec.noise * unit(rng);
        bool fg = false;
        for (const auto& o : objects) fg = fg || inside(o.box, x + 0.5, y + 0.5);
        pixels[static_cast<std::size_t>(y) * n + x] = quantise(fg ? spec.foreground : noise);
      }
    }
    std::ostringstream id;
    id << "scene_" << std::setw(5) << std::setfill('0') << s;
    scenes.push_back({id.str(), raster_from_bytes(n, n, 1, pixels), std::move(objects)});
  }
  return scenes;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingImage("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  DatasetManifest manifest;
  std::string line;
  int lineno = 0;
  bool split_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "split,image,annotation") {
        throw ParseError(path.string() + ":1: expected header 'split,image,annotation'");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 3) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 3 comma-separated fields");
    }
    if (split_seen && fields[0] != manifest.split) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": mixed splits in one manifest");
    }
    manifest.split = fields[0];
    split_seen = true;
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    manifest.entries.push_back({resolve(fields[1]), resolve(fields[2])});
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "split,image,annotation\n";
  for (const auto& e : manifest.entries) {
    out << manifest.split << ',' << e.image.generic_string() << ',' << e.annotation.generic_string() << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::string voc_annotation_xml(const std::string& filename, int width, int height, int depth,
                               const std::vector<GroundTruth>& objects) {
  pt::ptree root;
  pt::ptree& ann = root.add_child("annotation", pt::ptree());
  ann.put("filename", filename);
  ann.put("size.width", width);
  ann.put("size.height", height);
  ann.put("size.depth", depth);
  for (const auto& o : objects) {
    pt::ptree obj;
    obj.put("name", o.label);
    obj.put("difficult", 0);
    obj.put("bndbox.xmin", format_number(o.box.x0() + 1.0));
    obj.put("bndbox.ymin", format_number(o.box.y0() + 1.0));
    obj.put("bndbox.xmax", format_number(o.box.x1()));
    obj.put("bndbox.ymax", format_number(o.box.y1()));
    ann.add_child("object", obj);
  }
  std::ostringstream os;
  pt::write_xml(os, root, pt::xml_writer_make_settings<std::string>(' ', 2));
  return os.str();
}

std::vector<GroundTruth> parse_voc_annotation(const std::filesystem::path& path, const std::string& class_name,
                                              int* width, int* height) {
  pt::ptree root;
  try {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open annotation " + path.string());
    pt::read_xml(in, root);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const auto ann = root.get_child_optional("annotation");
  if (!ann) throw ParseError(path.string() + ": missing <annotation> root");

  if (const auto w = ann->get_optional<std::string>("size.width"); w && width) {
    *width = static_cast<int>(parse_number(*w, path, "size.width"));
  }
  if (const auto h = ann->get_optional<std::string>("size.height"); h && height) {
    *height = static_cast<int>(parse_number(*h, path, "size.height"));
  }

  std::vector<GroundTruth> objects;
  int index = 0;
  for (const auto& [tag, obj] : *ann) {
    if (tag != "object") continue;
    ++index;
    const std::string name = obj.get<std::string>("name", "");
    if (name != class_name) continue;
    if (const auto d = obj.get_optional<std::string>("difficult"); d && parse_number(*d, path, "difficult") != 0) {
      continue;
    }
    auto coord = [&](const char* key) {
      const auto v = obj.get_optional<std::string>(std::string("bndbox.") + key);
      const std::string field = "object " + std::to_string(index) + " bndbox." + key;
      if (!v) throw ParseError(path.string() + ": missing " + field);
      return parse_number(*v, path, field);
    };
    const double xmin = coord("xmin"), ymin = coord("ymin"), xmax = coord("xmax"), ymax = coord("ymax");
    try {
      objects.push_back({Box(xmin - 1.0, ymin - 1.0, xmax, ymax), name});
    } catch (const InvalidBox& e) {
      throw ParseError(path.string() + ": object " + std::to_string(index) + ": " + e.what());
    }
  }
  return objects;
}

std::vector<Scene> load_voc_annotations(const DatasetManifest& manifest, const std::string& class_name) {
  std::vector<Scene> scenes;
  for (const auto& e : manifest.entries) {
    int width = -1, height = -1;
    auto objects = parse_voc_annotation(e.annotation, class_name, &width, &height);
    if (objects.empty()) continue;
    if (!std::filesystem::exists(e.image)) throw MissingImage("missing image " + e.image.string());
    ImageRaster image = read_pnm(e.image);
    if ((width >= 0 && width != image.width()) || (height >= 0 && height != image.height())) {
      throw ParseError(e.annotation.string() + ": annotated size does not match image " + e.image.string());
    }
    Scene scene{e.image.stem().string(), std::move(image), std::move(objects)};
    scene.validate();
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::filesystem::path write_dataset(const std::vector<Scene>& scenes, const std::filesystem::path& dir,
                                    const std::string& split) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "annotations");
  DatasetManifest manifest{split, {}};
  for (const Scene& s : scenes) {
    const std::string ext = s.image.channels() == 1 ? ".pgm" : ".ppm";
    const fs::path image_rel = fs::path("images") / (s.id + ext);
    const fs::path ann_rel = fs::path("annotations") / (s.id + ".xml");
    write_pnm(dir / image_rel, s.image);
    std::ofstream ann(dir / ann_rel);
    if (!ann) throw IoError("cannot write annotation " + (dir / ann_rel).string());
    ann << voc_annotation_xml(image_rel.filename().string(), s.image.width(), s.image.height(), s.image.channels(),
                              s.objects);
    if (!ann) throw IoError("failed writing annotation " + (dir / ann_rel).string());
    manifest.entries.push_back({image_rel, ann_rel});
  }
  const fs::path manifest_path = dir / "manifest.csv";
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace hodet
