#include "hodet/replay.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hodet/errors.hpp"

namespace hodet {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be at least 1");
  items_.reserve(capacity_);
}

void ReplayMemory::push(Experience exp) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(exp));
    return;
  }
  items_[cursor_] = std::move(exp);
  cursor_ = (cursor_ + 1) % capacity_;
}

const Experience& ReplayMemory::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return items_[(cursor_ + i) % items_.size()];
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size > items_.size()) {
    throw InsufficientExperiences("need " + std::to_string(batch_size) + " experiences, have " +
                                  std::to_string(items_.size()));
  }
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<const Experience*> batch;
  batch.reserve(batch_size);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    batch.push_back(&items_[idx[i]]);
  }
  return batch;
}

std::vector<BellmanTarget> bellman_targets(const std::vector<const Experience*>& batch, const QNetwork& net,
                                           double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  std::vector<BellmanTarget> targets;
  targets.reserve(batch.size());
  for (const Experience* e : batch) {
    double value = e->reward;
    if (!e->terminal && gamma > 0.0) {
      const auto q = q_values(net, e->next_state);
      value += gamma * static_cast<double>(*std::max_element(q.begin(), q.end()));
    }
    targets.push_back({value, e->action});
  }
  return targets;
}

}  // namespace hodet
