#include "hodet/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hodet/errors.hpp"

namespace hodet {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"data_source", "auto", "synthetic | manifest | auto (manifest when one is given)"},
      {"manifest", "", "dataset manifest (split,image,annotation CSV)"},
      {"voc_class", "object", "annotation class to keep"},
      {"image_size", "64", "synthetic image side in pixels"},
      {"num_scenes", "100", "synthetic scene count"},
      {"min_objects", "1", "minimum objects per synthetic scene"},
      {"max_objects", "1", "maximum objects per synthetic scene"},
      {"min_size", "0.1", "minimum object side as a fraction of the image"},
      {"max_size", "0.9", "maximum object side as a fraction of the image"},
      {"placement", "aligned", "uniform | aligned"},
      {"min_depth", "1", "shallowest hierarchy depth for aligned objects"},
      {"max_depth", "3", "deepest hierarchy depth for aligned objects"},
      {"noise", "0.2", "background noise amplitude"},
      {"foreground", "0.8", "object intensity"},
      {"label", "object", "class label of synthetic objects"},
      {"split", "train", "split label written to generated manifests"},
      {"epochs", "50", "training epochs"},
      {"gamma", "0.9", "discount factor"},
      {"epsilon_start", "1.0", "initial exploration rate"},
      {"epsilon_floor", "0.1", "minimum exploration rate"},
      {"epsilon_decrement", "0.1", "exploration decrease per epoch"},
      {"lr", "1e-4", "Adam learning rate"},
      {"replay_capacity", "1000", "replay memory size"},
      {"batch_size", "100", "minibatch size"},
      {"trigger_threshold", "0.5", "IoU above which training forces the trigger"},
      {"hidden", "128", "hidden layer width"},
      {"keep_prob", "0.8", "dropout keep probability"},
      {"scheme", "overlapped", "overlapped | non-overlapped"},
      {"extractor", "zoom", "zoom | crop"},
      {"grid", "7", "descriptor grid size"},
      {"stride_shallow", "8", "stride of the shallow feature map"},
      {"stride_deep", "16", "stride of the deep feature map"},
      {"max_steps", "8", "actions per episode"},
      {"eta", "3", "trigger reward magnitude"},
      {"tau", "0.5", "trigger IoU threshold"},
      {"seed", "1", "random seed"},
      {"out_dir", "out", "output directory"},
      {"checkpoint", "", "checkpoint to evaluate or trace"},
      {"image", "", "image to trace"},
      {"annotation", "", "optional annotation for the traced image"},
      {"trace_output", "", "trace destination (stdout when empty)"},
  };
  return keys;
}

namespace {

bool known_key(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const KeyValues& kv, const std::string& key) {
  const std::string& text = kv.at(key);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "' has malformed value '" + text + "'");
  }
  return value;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known_key(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

RunConfig RunConfig::resolve(const KeyValues& file_values, const KeyValues& overrides) {
  RunConfig cfg;
  for (const auto& k : config_keys()) cfg.values[k.name] = k.default_value;
  for (const KeyValues* layer : {&file_values, &overrides}) {
    for (const auto& [key, value] : *layer) {
      if (!known_key(key)) throw ConfigError("unknown config key '" + key + "'");
      cfg.values[key] = value;
    }
  }
  const KeyValues& kv = cfg.values;

  cfg.manifest = kv.at("manifest");
  const std::string& source = kv.at("data_source");
  if (source == "auto") {
    cfg.source = cfg.manifest.empty() ? DataSource::Synthetic : DataSource::Manifest;
  } else if (source == "synthetic") {
    if (!cfg.manifest.empty()) throw ConfigError("data_source=synthetic conflicts with a manifest path");
    cfg.source = DataSource::Synthetic;
  } else if (source == "manifest") {
    if (cfg.manifest.empty()) throw ConfigError("data_source=manifest requires a manifest path");
    cfg.source = DataSource::Manifest;
  } else {
    throw ConfigError("unknown data_source '" + source + "'");
  }
  cfg.voc_class = kv.at("voc_class");

  SyntheticSpec& syn = cfg.synthetic;
  syn.image_size = parse_value<int>(kv, "image_size");
  syn.num_scenes = parse_value<int>(kv, "num_scenes");
  syn.min_objects = parse_value<int>(kv, "min_objects");
  syn.max_objects = parse_value<int>(kv, "max_objects");
  syn.min_size = parse_value<double>(kv, "min_size");
  syn.max_size = parse_value<double>(kv, "max_size");
  syn.placement = parse_placement(kv.at("placement"));
  syn.min_depth = parse_value<int>(kv, "min_depth");
  syn.max_depth = parse_value<int>(kv, "max_depth");
  syn.noise = parse_value<double>(kv, "noise");
  syn.foreground = parse_value<double>(kv, "foreground");
  syn.label = kv.at("label");
  syn.scheme = parse_scheme(kv.at("scheme"));
  syn.seed = parse_value<std::uint64_t>(kv, "seed");

  TrainConfig& t = cfg.train;
  t.epochs = parse_value<int>(kv, "epochs");
  t.gamma = parse_value<double>(kv, "gamma");
  t.epsilon_start = parse_value<double>(kv, "epsilon_start");
  t.epsilon_floor = parse_value<double>(kv, "epsilon_floor");
  t.epsilon_decrement = parse_value<double>(kv, "epsilon_decrement");
  t.learning_rate = parse_value<double>(kv, "lr");
  t.replay_capacity = parse_value<std::size_t>(kv, "replay_capacity");
  t.batch_size = parse_value<std::size_t>(kv, "batch_size");
  t.trigger_threshold = parse_value<double>(kv, "trigger_threshold");
  t.hidden = parse_value<int>(kv, "hidden");
  t.keep_prob = parse_value<double>(kv, "keep_prob");
  t.seed = syn.seed;
  t.env.scheme = syn.scheme;
  t.env.extractor = parse_extractor(kv.at("extractor"));
  t.env.features.grid = parse_value<int>(kv, "grid");
  t.env.features.shallow_stride = parse_value<int>(kv, "stride_shallow");
  t.env.features.deep_stride = parse_value<int>(kv, "stride_deep");
  t.env.max_steps = parse_value<int>(kv, "max_steps");
  t.env.rewards.eta = parse_value<double>(kv, "eta");
  t.env.rewards.tau = parse_value<double>(kv, "tau");
  t.validate();
  if (t.keep_prob <= 0.0 || t.keep_prob > 1.0) throw ConfigError("keep_prob must lie in (0, 1]");
  if (t.env.features.grid < 1 || t.env.features.shallow_stride < 1 ||
      t.env.features.deep_stride <= t.env.features.shallow_stride) {
    throw ConfigError("grid must be >= 1 and strides must satisfy 1 <= stride_shallow < stride_deep");
  }

  cfg.out_dir = kv.at("out_dir");
  cfg.checkpoint = kv.at("checkpoint");
  cfg.image = kv.at("image");
  cfg.annotation = kv.at("annotation");
  cfg.trace_output = kv.at("trace_output");
  return cfg;
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& k : config_keys()) os << k.name << " = " << values.at(k.name) << '\n';
  return os.str();
}

std::vector<Scene> load_scenes(const RunConfig& cfg) {
  if (cfg.source == DataSource::Manifest) return load_voc_annotations(read_manifest(cfg.manifest), cfg.voc_class);
  return generate(cfg.synthetic);
}

}  // namespace hodet
