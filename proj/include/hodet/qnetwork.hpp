#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hodet/environment.hpp"

namespace hodet {

using Rng = std::mt19937_64;

enum class Mode { Train, Infer };

// Activations kept by a train-mode forward pass for the backward pass.
template <std::floating_point T>
struct ForwardCache {
  std::vector<std::vector<T>> activations;  // input, then each hidden layer after ReLU and dropout
  std::vector<std::vector<T>> masks;        // per hidden layer: 0 for dropped or inactive units, 1/keep otherwise
  std::vector<T> outputs;
  bool valid = false;
};

// Fully connected ReLU network [input, H, H, outputs] with inverted dropout
// on the hidden layers. Parameters live in one flat vector, layer by layer,
// each layer as its weight matrix (out x in, row-major) followed by its bias.
template <std::floating_point T>
class Mlp {
 public:
  Mlp(std::vector<int> sizes, double keep_prob = 0.8);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  double keep_prob() const { return keep_prob_; }
  void set_keep_prob(double keep);

  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }
  std::span<T> weights(int layer);
  std::span<const T> weights(int layer) const;
  std::span<T> bias(int layer);
  std::span<const T> bias(int layer) const;
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }

  // Inference: no dropout, deterministic.
  std::vector<T> infer(std::span<const T> input) const;
  // Train mode samples dropout masks from `rng` and fills `cache`.
  std::vector<T> forward(std::span<const T> input, Mode mode, Rng& rng, ForwardCache<T>* cache = nullptr) const;

  // Accumulates scale * d(0.5 * td_error^2)/d(params) into `grads`, where the
  // loss only involves output `action`. Throws StaleCache when `cache` did not
  // come from a train-mode forward pass of a network with this shape.
  void backward(const ForwardCache<T>& cache, int action, T td_error, std::span<T> grads, T scale = T(1)) const;
  std::vector<T> gradients(const ForwardCache<T>& cache, int action, T td_error) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  void check_input(std::size_t n) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  double keep_prob_;
  std::vector<T> params_;
};

extern template class Mlp<float>;
extern template class Mlp<double>;

using QNetwork = Mlp<float>;

// Layer sizes {input, hidden, hidden, 6}.
std::vector<int> qnetwork_sizes(int input_size, int hidden);

// Weights ~ N(0, 1/fan_in), biases zero.
template <std::floating_point T>
Mlp<T> init_weights(const std::vector<int>& sizes, Rng& rng, double keep_prob = 0.8);

// Q-values for an agent state, inference mode.
std::array<float, kNumActions> q_values(const QNetwork& net, const AgentState& state);

struct AdamParams {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <std::floating_point T>
struct AdamState {
  AdamParams params;
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::size_t num_params, AdamParams p) : params(p), m(num_params, T(0)), v(num_params, T(0)) {}
};

// Bias-corrected Adam update of every parameter. Throws ShapeMismatch.
template <std::floating_point T>
void adam_step(Mlp<T>& net, std::span<const T> grads, AdamState<T>& opt);

// Checkpoint layout, little-endian:
//   "HQDN" | u32 version | u32 n | n x u32 layer sizes | f32 parameters
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::uint8_t> save(const QNetwork& net);
QNetwork load(std::span<const std::uint8_t> bytes, double keep_prob = 0.8);
void save_file(const QNetwork& net, const std::string& path);
QNetwork load_file(const std::string& path, double keep_prob = 0.8);

}  // namespace hodet
