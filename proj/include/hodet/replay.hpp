#pragma once

#include <cstddef>
#include <vector>

#include "hodet/environment.hpp"
#include "hodet/qnetwork.hpp"

namespace hodet {

struct Experience {
  AgentState state;
  Action action;
  double reward;
  AgentState next_state;
  // True when the trigger was taken or the step limit ended the episode.
  bool terminal;
};

// Fixed-capacity FIFO ring buffer.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 1000);

  void push(Experience exp);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // i-th oldest stored experience.
  const Experience& at(std::size_t i) const;

  // Uniform sample without replacement. Throws InsufficientExperiences.
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;  // slot overwritten by the next push once full
  std::vector<Experience> items_;
};

struct BellmanTarget {
  double value;
  Action action;
};

// r for terminal experiences (next_state untouched); r + gamma * max_a' Q(s', a')
// otherwise, with Q evaluated in inference mode.
std::vector<BellmanTarget> bellman_targets(const std::vector<const Experience*>& batch, const QNetwork& net,
                                           double gamma);

}  // namespace hodet
