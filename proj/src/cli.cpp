#include "hodet/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "hodet/errors.hpp"
#include "hodet/evaluation.hpp"

namespace hodet::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
  write_text(cfg.out_dir / "effective_config.txt", cfg.dump());
}

std::vector<Scene> require_scenes(const RunConfig& cfg) {
  std::vector<Scene> scenes = load_scenes(cfg);
  if (scenes.empty()) throw EmptyDataset("data source yielded no scenes");
  return scenes;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_text(path, os.str());
}

}  // namespace

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  prepare_out_dir(cfg);
  const std::vector<Scene> scenes = generate(cfg.synthetic);
  const fs::path manifest = write_dataset(scenes, cfg.out_dir, cfg.values.at("split"));
  out << "wrote " << scenes.size() << " scenes, manifest " << manifest.string() << '\n';
  return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const std::vector<Scene> scenes = require_scenes(cfg);
  prepare_out_dir(cfg);
  TrainConfig tc = cfg.train;
  tc.checkpoint_dir = (cfg.out_dir / "checkpoints").string();

  std::ofstream log(cfg.out_dir / "train_log.jsonl");
  if (!log) throw IoError("cannot write training log in " + cfg.out_dir.string());
  const TrainResult result = train(scenes, tc, [&](const EpochLog& e, const QNetwork&) {
    log << e.to_json() << '\n';
    log.flush();
    out << "epoch " << e.epoch << " eps=" << e.epsilon << " mean_reward=" << e.mean_reward
        << " mean_steps=" << e.mean_steps << '\n';
  });
  save_file(result.net, (cfg.out_dir / "final.hqdn").string());
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
  const QNetwork net = load_file(cfg.checkpoint.string(), cfg.train.keep_prob);
  const std::vector<Scene> scenes = require_scenes(cfg);
  prepare_out_dir(cfg);
  const EnvConfig& env = cfg.train.env;

  const EvalResult agent = evaluate_agent(scenes, net, env);
  Rng rng(cfg.train.seed);
  const EvalResult random = random_baseline(scenes, env, rng);
  const PRCurve oracle = oracle_upper_bound(scenes, env.scheme, env.max_steps);

  write_csv(cfg.out_dir / "pr_agent.csv", [&](std::ostream& os) { write_pr_csv(os, agent.curve); });
  write_csv(cfg.out_dir / "pr_random.csv", [&](std::ostream& os) { write_pr_csv(os, random.curve); });
  write_csv(cfg.out_dir / "pr_oracle.csv", [&](std::ostream& os) { write_pr_csv(os, oracle); });
  write_csv(cfg.out_dir / "steps_histogram.csv",
            [&](std::ostream& os) { write_histogram_csv(os, steps_histogram(agent.traces)); });

  write_csv(cfg.out_dir / "coverage.csv", [&](std::ostream& os) {
    os << "scheme,max_steps,objects,coverage\n";
    for (HierarchyScheme scheme : {HierarchyScheme::Overlapped, HierarchyScheme::NonOverlapped}) {
      // Scenes may differ in size, so coverage is accumulated per scene.
      double covered = 0.0;
      std::size_t objects = 0;
      for (const Scene& s : scenes) {
        std::vector<Box> boxes;
        for (const auto& o : s.objects) boxes.push_back(o.box);
        covered += coverage_recall(scheme, s.image.bounds(), env.max_steps, boxes) * static_cast<double>(boxes.size());
        objects += boxes.size();
      }
      os << to_string(scheme) << ',' << env.max_steps << ',' << objects << ','
         << std::setprecision(10) << (objects ? covered / static_cast<double>(objects) : 0.0) << '\n';
    }
  });

  std::ofstream traces(cfg.out_dir / "traces.jsonl");
  if (!traces) throw IoError("cannot write traces in " + cfg.out_dir.string());
  for (const auto& t : agent.traces) write_trace(traces, t);

  out << std::setprecision(6);
  out << "AP agent=" << agent.curve.average_precision << '\n';
  out << "AP random=" << random.curve.average_precision << '\n';
  out << "AP oracle=" << oracle.average_precision << '\n';
  return kOk;
}

int cmd_trace(const RunConfig& cfg, std::ostream& out) {
  if (cfg.checkpoint.empty()) throw ConfigError("trace requires --checkpoint");
  if (cfg.image.empty()) throw ConfigError("trace requires --image");
  const QNetwork net = load_file(cfg.checkpoint.string(), cfg.train.keep_prob);
  if (!fs::exists(cfg.image)) throw MissingImage("missing image " + cfg.image.string());
  Scene scene{cfg.image.stem().string(), read_pnm(cfg.image), {}};
  if (!cfg.annotation.empty()) {
    int w = -1, h = -1;
    scene.objects = parse_voc_annotation(cfg.annotation, cfg.voc_class, &w, &h);
    scene.validate();
  }
  const EvalResult result = evaluate_agent({scene}, net, cfg.train.env);
  if (cfg.trace_output.empty()) {
    write_trace(out, result.traces.front());
  } else {
    write_text(cfg.trace_output, trace_to_string(result.traces.front()));
  }
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical object detection with a deep Q-learning agent", "hodet"};
  app.require_subcommand(1);
  std::string config_path;
  KeyValues overrides;
  std::map<std::string, std::string> flag_values;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"generate", "write a synthetic dataset (images, annotations, manifest)", cmd_generate},
      {"train", "train the Q-network and write per-epoch checkpoints and a log", cmd_train},
      {"eval", "write PR curves, coverage and the steps histogram for a checkpoint", cmd_eval},
      {"trace", "print the step-by-step search on one image", cmd_trace},
  };
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "flat key = value config file");
    for (const ConfigKey& k : config_keys()) {
      sub->add_option("--" + k.name, flag_values[k.name], k.help);
    }
    subs[c.name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  for (const Command& c : commands) {
    CLI::App* sub = subs.at(c.name);
    if (!sub->parsed()) continue;
    try {
      for (const ConfigKey& k : config_keys()) {
        if (sub->count("--" + k.name) > 0) overrides[k.name] = flag_values[k.name];
      }
      const KeyValues file_values = config_path.empty() ? KeyValues{} : read_config_file(config_path);
      const RunConfig cfg = RunConfig::resolve(file_values, overrides);
      return c.fn(cfg, out);
    } catch (const ConfigError& e) {
      err << "usage error: " << e.what() << '\n';
      return kUsage;
    } catch (const FormatError& e) {
      err << "FormatError: " << e.what() << '\n';
      return kDataError;
    } catch (const DataError& e) {
      err << "data error: " << e.what() << '\n';
      return kDataError;
    } catch (const fs::filesystem_error& e) {
      err << "io error: " << e.what() << '\n';
      return kDataError;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << '\n';
      return kInternal;
    }
  }
  return kUsage;
}

}  // namespace hodet::cli
