#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hodet/environment.hpp"
#include "hodet/qnetwork.hpp"
#include "hodet/replay.hpp"

namespace hodet {

struct TrainConfig {
  int epochs = 50;
  double gamma = 0.90;
  double epsilon_start = 1.0;
  double epsilon_floor = 0.1;
  double epsilon_decrement = 0.1;
  double learning_rate = 1e-4;
  std::size_t replay_capacity = 1000;
  std::size_t batch_size = 100;
  double trigger_threshold = 0.5;
  int hidden = 128;
  double keep_prob = 0.8;
  EnvConfig env;
  std::uint64_t seed = 1;
  // Per-epoch checkpoints are written here when non-empty.
  std::string checkpoint_dir;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

double epsilon_for_epoch(const TrainConfig& cfg, int epoch);

// Forced trigger when target_iou exceeds the threshold; otherwise epsilon-greedy
// with argmax ties going to the lowest index.
Action choose_action(const std::array<float, kNumActions>& q, double target_iou, double epsilon, Rng& rng,
                     double trigger_threshold = 0.5);

Action greedy_action(const std::array<float, kNumActions>& q);

// Plays one training episode, pushing one experience per step.
EpisodeTrace run_episode(const Scene& scene, const QNetwork& net, const TrainConfig& cfg, double epsilon,
                         ReplayMemory& memory, Rng& rng);

struct EpochLog {
  int epoch = 0;  // 1-based
  double epsilon = 0.0;
  double mean_reward = 0.0;           // mean undiscounted return per episode
  double mean_terminal_reward = 0.0;  // mean trigger reward over triggered episodes
  double mean_steps = 0.0;
  double loss = 0.0;                  // mean 0.5 * td^2 over the epoch's updates
  std::size_t replay_size = 0;
  std::string checkpoint;  // file name within the checkpoint directory

  std::string to_json() const;
};

struct TrainResult {
  QNetwork net;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&, const QNetwork&)>;
using EpisodeCallback = std::function<void(int epoch, const EpisodeTrace&)>;

// One Adam update on a minibatch: Bellman targets from the current network,
// squared TD error on the taken action, gradients averaged over the batch.
// Returns the mean loss.
double train_on_batch(QNetwork& net, AdamState<float>& opt, const std::vector<const Experience*>& batch,
                      double gamma, Rng& rng);

TrainResult train(const std::vector<Scene>& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {},
                  const EpisodeCallback& on_episode = {});

}  // namespace hodet
