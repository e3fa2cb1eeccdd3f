#include "hodet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "hodet/errors.hpp"

namespace hodet {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(epsilon_floor >= 0.0 && epsilon_floor <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("epsilon schedule must satisfy 0 <= floor <= start <= 1");
  }
  if (epsilon_decrement < 0.0) throw ConfigError("epsilon decrement must be non-negative");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
  if (replay_capacity < 1 || batch_size < 1) throw ConfigError("replay capacity and batch size must be >= 1");
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
  if (env.max_steps < 1) throw ConfigError("max_steps must be >= 1");
}

double epsilon_for_epoch(const TrainConfig& cfg, int epoch) {
  if (epoch < 0) throw ConfigError("epoch index must be non-negative");
  // Rounded to 1e-12 so that 1.0 - 9 * 0.1 reads as 0.1.
  const double raw = cfg.epsilon_start - epoch * cfg.epsilon_decrement;
  const double rounded = std::round(raw * 1e12) / 1e12;
  return std::max(rounded, cfg.epsilon_floor);
}

Action greedy_action(const std::array<float, kNumActions>& q) {
  return static_cast<Action>(std::max_element(q.begin(), q.end()) - q.begin());
}

Action choose_action(const std::array<float, kNumActions>& q, double target_iou, double epsilon, Rng& rng,
                     double trigger_threshold) {
  if (target_iou > trigger_threshold) return Action::Trigger;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> any(0, kNumActions - 1);
    return static_cast<Action>(any(rng));
  }
  return greedy_action(q);
}

EpisodeTrace run_episode(const Scene& scene, const QNetwork& net, const TrainConfig& cfg, double epsilon,
                         ReplayMemory& memory, Rng& rng) {
  Environment env(scene, cfg.env);
  EpisodeTrace trace;
  trace.scene_id = scene.id;
  while (!env.done()) {
    const Box region = env.region();
    AgentState state = env.state();
    const auto q = q_values(net, state);
    const Action action = choose_action(q, env.target_iou(), epsilon, rng, cfg.trigger_threshold);
    StepResult r = env.step(action);
    trace.steps.push_back({region, action, r.reward, q});
    memory.push({std::move(state), action, r.reward, std::move(r.state), r.done});
    if (action == Action::Trigger) trace.status = EpisodeStatus::Triggered;
  }
  return trace;
}

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["epsilon"] = epsilon;
  j["mean_reward"] = mean_reward;
  j["mean_terminal_reward"] = mean_terminal_reward;
  j["mean_steps"] = mean_steps;
  j["loss"] = loss;
  j["replay_size"] = replay_size;
  j["checkpoint"] = checkpoint;
  return j.dump();
}

double train_on_batch(QNetwork& net, AdamState<float>& opt, const std::vector<const Experience*>& batch,
                      double gamma, Rng& rng) {
  const auto targets = bellman_targets(batch, net, gamma);
  std::vector<float> grads(net.parameters().size(), 0.0f);
  ForwardCache<float> cache;
  const float scale = 1.0f / static_cast<float>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<float> x = batch[i]->state.to_input();
    const std::vector<float> q = net.forward(x, Mode::Train, rng, &cache);
    const int a = index_of(targets[i].action);
    const double td = static_cast<double>(q[a]) - targets[i].value;
    loss += 0.5 * td * td;
    net.backward(cache, a, static_cast<float>(td), grads, scale);
  }
  adam_step<float>(net, grads, opt);
  return loss / static_cast<double>(batch.size());
}

TrainResult train(const std::vector<Scene>& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch,
                  const EpisodeCallback& on_episode) {
  if (dataset.empty()) throw EmptyDataset("training dataset is empty");
  cfg.validate();
  for (const Scene& s : dataset) {
    if (s.objects.empty()) throw NoGroundTruth("training scene " + s.id + " has no ground truth");
  }

  Rng rng(cfg.seed);
  const int channels = dataset.front().image.channels();
  const int input = cfg.env.features.grid * cfg.env.features.grid * channels + MemoryVector::kSize;
  TrainResult result{init_weights<float>(qnetwork_sizes(input, cfg.hidden), rng, cfg.keep_prob), {}};
  QNetwork& net = result.net;
  AdamState<float> opt(net.parameters().size(), AdamParams{cfg.learning_rate});
  ReplayMemory memory(cfg.replay_capacity);

  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double epsilon = epsilon_for_epoch(cfg, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double total_reward = 0.0, terminal_reward = 0.0, total_loss = 0.0;
    std::size_t steps = 0, triggered = 0, updates = 0;
    for (std::size_t idx : order) {
      const EpisodeTrace trace = run_episode(dataset[idx], net, cfg, epsilon, memory, rng);
      for (const TraceStep& s : trace.steps) total_reward += s.reward.value_or(0.0);
      steps += trace.steps.size();
      if (on_episode) on_episode(epoch + 1, trace);
      if (trace.status == EpisodeStatus::Triggered) {
        ++triggered;
        terminal_reward += trace.steps.back().reward.value_or(0.0);
      }
      if (memory.size() >= cfg.batch_size) {
        total_loss += train_on_batch(net, opt, memory.sample(cfg.batch_size, rng), cfg.gamma, rng);
        ++updates;
      }
    }

    EpochLog log;
    log.epoch = epoch + 1;
    log.epsilon = epsilon;
    log.mean_reward = total_reward / static_cast<double>(dataset.size());
    log.mean_terminal_reward = triggered ? terminal_reward / static_cast<double>(triggered) : 0.0;
    log.mean_steps = static_cast<double>(steps) / static_cast<double>(dataset.size());
    log.loss = updates ? total_loss / static_cast<double>(updates) : 0.0;
    log.replay_size = memory.size();
    if (!cfg.checkpoint_dir.empty()) {
      std::ostringstream name;
      name << "epoch_" << std::setw(3) << std::setfill('0') << epoch + 1 << ".hqdn";
      log.checkpoint = name.str();
      save_file(net, (std::filesystem::path(cfg.checkpoint_dir) / name.str()).string());
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log, net);
  }
  return result;
}

}  // namespace hodet
