#include "hodet/qnetwork.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hodet/errors.hpp"

namespace hodet {

template <std::floating_point T>
Mlp<T>::Mlp(std::vector<int> sizes, double keep_prob) : sizes_(std::move(sizes)), keep_prob_(1.0) {
  if (sizes_.size() < 2) throw ShapeMismatch("network needs at least an input and an output layer");
  for (int s : sizes_) {
    if (s < 1) throw ShapeMismatch("layer sizes must be positive");
  }
  set_keep_prob(keep_prob);
  std::size_t total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, T(0));
}

template <std::floating_point T>
void Mlp<T>::set_keep_prob(double keep) {
  if (!(keep > 0.0 && keep <= 1.0)) throw ConfigError("dropout keep probability must lie in (0, 1]");
  keep_prob_ = keep;
}

template <std::floating_point T>
std::span<T> Mlp<T>::weights(int layer) {
  return std::span<T>(params_).subspan(offsets_[layer], static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer]);
}

template <std::floating_point T>
std::span<const T> Mlp<T>::weights(int layer) const {
  return std::span<const T>(params_).subspan(offsets_[layer],
                                             static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer]);
}

template <std::floating_point T>
std::span<T> Mlp<T>::bias(int layer) {
  return std::span<T>(params_).subspan(offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer],
                                       sizes_[layer + 1]);
}

template <std::floating_point T>
std::span<const T> Mlp<T>::bias(int layer) const {
  return std::span<const T>(params_).subspan(
      offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer], sizes_[layer + 1]);
}

template <std::floating_point T>
void Mlp<T>::check_input(std::size_t n) const {
  if (n != static_cast<std::size_t>(input_size())) {
    throw ShapeMismatch("state has " + std::to_string(n) + " entries, network expects " +
                        std::to_string(input_size()));
  }
}

template <std::floating_point T>
std::vector<T> Mlp<T>::infer(std::span<const T> input) const {
  Rng unused(0);
  return forward(input, Mode::Infer, unused, nullptr);
}

template <std::floating_point T>
std::vector<T> Mlp<T>::forward(std::span<const T> input, Mode mode, Rng& rng, ForwardCache<T>* cache) const {
  check_input(input.size());
  const bool train = mode == Mode::Train;
  const bool dropout = train && keep_prob_ < 1.0;
  const T inv_keep = static_cast<T>(1.0 / keep_prob_);
  std::bernoulli_distribution keep(keep_prob_);

  if (cache) {
    cache->activations.assign(1, std::vector<T>(input.begin(), input.end()));
    cache->masks.clear();
    cache->valid = false;
  }

  std::vector<T> current(input.begin(), input.end());
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const std::span<const T> w = weights(l);
    const std::span<const T> b = bias(l);
    std::vector<T> next(out);
    for (int o = 0; o < out; ++o) {
      const T* row = w.data() + static_cast<std::size_t>(o) * in;
      T acc = b[o];
      for (int i = 0; i < in; ++i) acc += row[i] * current[i];
      next[o] = acc;
    }
    if (l + 1 < num_layers()) {
      std::vector<T> mask(out);
      for (int o = 0; o < out; ++o) {
        T m = next[o] > T(0) ? T(1) : T(0);
        if (dropout) m = keep(rng) ? m * inv_keep : T(0);
        mask[o] = m;
        next[o] = m == T(0) ? T(0) : next[o] * m;
      }
      if (cache) {
        cache->activations.push_back(next);
        cache->masks.push_back(std::move(mask));
      }
    }
    current = std::move(next);
  }
  if (cache && train) {
    cache->outputs = current;
    cache->valid = true;
  }
  return current;
}

template <std::floating_point T>
void Mlp<T>::backward(const ForwardCache<T>& cache, int action, T td_error, std::span<T> grads, T scale) const {
  if (!cache.valid || cache.activations.size() != static_cast<std::size_t>(num_layers()) ||
      cache.activations.front().size() != static_cast<std::size_t>(input_size())) {
    throw StaleCache("backward requires activations from a train-mode forward pass");
  }
  if (grads.size() != params_.size()) throw ShapeMismatch("gradient buffer does not match parameters");
  if (action < 0 || action >= output_size()) throw InvalidAction("action index " + std::to_string(action));

  // dL/d(output) is td_error on the chosen action only.
  std::vector<T> delta(output_size(), T(0));
  delta[action] = td_error * scale;

  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const std::vector<T>& a_in = cache.activations[l];
    T* gw = grads.data() + offsets_[l];
    T* gb = gw + static_cast<std::size_t>(out) * in;
    for (int o = 0; o < out; ++o) {
      const T d = delta[o];
      if (d == T(0)) continue;
      gb[o] += d;
      T* row = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) row[i] += d * a_in[i];
    }
    if (l == 0) break;
    const std::span<const T> w = weights(l);
    const std::vector<T>& mask = cache.masks[l - 1];
    std::vector<T> prev(in, T(0));
    for (int o = 0; o < out; ++o) {
      const T d = delta[o];
      if (d == T(0)) continue;
      const T* row = w.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) prev[i] += d * row[i];
    }
    for (int i = 0; i < in; ++i) prev[i] *= mask[i];
    delta = std::move(prev);
  }
}

template <std::floating_point T>
std::vector<T> Mlp<T>::gradients(const ForwardCache<T>& cache, int action, T td_error) const {
  std::vector<T> g(params_.size(), T(0));
  backward(cache, action, td_error, g);
  return g;
}

template class Mlp<float>;
template class Mlp<double>;

std::vector<int> qnetwork_sizes(int input_size, int hidden) { return {input_size, hidden, hidden, kNumActions}; }

template <std::floating_point T>
Mlp<T> init_weights(const std::vector<int>& sizes, Rng& rng, double keep_prob) {
  Mlp<T> net(sizes, keep_prob);
  for (int l = 0; l < net.num_layers(); ++l) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(sizes[l])));
    for (T& w : net.weights(l)) w = static_cast<T>(dist(rng));
  }
  return net;
}

template Mlp<float> init_weights<float>(const std::vector<int>&, Rng&, double);
template Mlp<double> init_weights<double>(const std::vector<int>&, Rng&, double);

std::array<float, kNumActions> q_values(const QNetwork& net, const AgentState& state) {
  if (net.output_size() != kNumActions) throw ShapeMismatch("Q-network must have 6 outputs");
  const std::vector<float> x = state.to_input();
  const std::vector<float> q = net.infer(x);
  std::array<float, kNumActions> out{};
  std::copy(q.begin(), q.end(), out.begin());
  return out;
}

template <std::floating_point T>
void adam_step(Mlp<T>& net, std::span<const T> grads, AdamState<T>& opt) {
  std::span<T> params = net.parameters();
  if (grads.size() != params.size() || opt.m.size() != params.size() || opt.v.size() != params.size()) {
    throw ShapeMismatch("Adam state, gradients and parameters differ in size");
  }
  const AdamParams& p = opt.params;
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(p.beta1, t);
  const double c2 = 1.0 - std::pow(p.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = p.beta1 * opt.m[i] + (1.0 - p.beta1) * g;
    const double v = p.beta2 * opt.v[i] + (1.0 - p.beta2) * g * g;
    opt.m[i] = static_cast<T>(m);
    opt.v[i] = static_cast<T>(v);
    const double update = p.learning_rate * (m / c1) / (std::sqrt(v / c2) + p.epsilon);
    params[i] = static_cast<T>(params[i] - update);
  }
}

template void adam_step<float>(Mlp<float>&, std::span<const float>, AdamState<float>&);
template void adam_step<double>(Mlp<double>&, std::span<const double>, AdamState<double>&);

namespace {

constexpr char kMagic[4] = {'H', 'Q', 'D', 'N'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save(const QNetwork& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.sizes().size()));
  for (int s : net.sizes()) put_u32(out, static_cast<std::uint32_t>(s));
  for (float p : net.parameters()) put_u32(out, std::bit_cast<std::uint32_t>(p));
  return out;
}

QNetwork load(std::span<const std::uint8_t> bytes, double keep_prob) {
  ByteReader in(bytes);
  const auto magic = in.raw(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw FormatError("bad checkpoint magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t n = in.u32();
  if (n < 2 || n > 64) throw FormatError("implausible layer count " + std::to_string(n));
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t s = in.u32();
    if (s == 0 || s > (1u << 20)) throw FormatError("implausible layer size " + std::to_string(s));
    sizes.push_back(static_cast<int>(s));
  }
  if (sizes.back() != kNumActions) throw FormatError("checkpoint output layer is not 6-way");
  QNetwork net(sizes, keep_prob);
  auto params = net.parameters();
  if (in.remaining() != params.size() * 4) {
    throw FormatError(in.remaining() < params.size() * 4 ? "checkpoint is truncated"
                                                         : "trailing bytes after checkpoint parameters");
  }
  for (float& p : params) p = in.f32();
  return net;
}

void save_file(const QNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  const auto bytes = save(net);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path);
}

QNetwork load_file(const std::string& path, double keep_prob) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return load(bytes, keep_prob);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace hodet
