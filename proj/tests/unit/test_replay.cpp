#include <doctest.h>

#include <algorithm>
#include <set>

#include "hodet/errors.hpp"
#include "hodet/replay.hpp"
#include "oracles.hpp"

using namespace hodet;

namespace {

AgentState state_of(float v, int n = 3) {
  AgentState s;
  s.descriptor = Descriptor{1, n, std::vector<float>(static_cast<std::size_t>(n), v)};
  return s;
}

Experience tagged(int i, bool terminal = false) {
  return {state_of(static_cast<float>(i)), Action::Center, static_cast<double>(i % 3) - 1.0,
          state_of(static_cast<float>(i)), terminal};
}

int tag(const Experience& e) { return static_cast<int>(e.state.descriptor.values[0]); }

}  // namespace

TEST_CASE("push grows until capacity, then evicts FIFO") {
  ReplayMemory mem(1000);
  mem.push(tagged(0));
  CHECK(mem.size() == 1);
  for (int i = 1; i < 1000; ++i) mem.push(tagged(i));
  CHECK(mem.size() == 1000);
  for (int i = 0; i < 1000; ++i) REQUIRE(tag(mem.at(i)) == i);
  mem.push(tagged(1000));
  CHECK(mem.size() == 1000);
  CHECK(tag(mem.at(0)) == 1);
  CHECK(tag(mem.at(999)) == 1000);
  for (int i = 1001; i < 2500; ++i) mem.push(tagged(i));
  for (int i = 0; i < 1000; ++i) REQUIRE(tag(mem.at(i)) == 1500 + i);
}

TEST_CASE("sampling the whole memory yields a permutation") {
  ReplayMemory mem(100);
  for (int i = 0; i < 100; ++i) mem.push(tagged(i));
  Rng rng(1);
  const auto batch = mem.sample(100, rng);
  std::set<int> seen;
  for (const Experience* e : batch) seen.insert(tag(*e));
  CHECK(seen.size() == 100);
}

TEST_CASE("sampling more than stored fails") {
  ReplayMemory mem(1000);
  for (int i = 0; i < 99; ++i) mem.push(tagged(i));
  Rng rng(1);
  CHECK_THROWS_AS(mem.sample(100, rng), InsufficientExperiences);
}

TEST_CASE("batches of 100 from 1000 include every item uniformly") {
  ReplayMemory mem(1000);
  for (int i = 0; i < 1000; ++i) mem.push(tagged(i));
  Rng rng(17);
  const int draws = 10000;
  std::vector<int> counts(1000, 0);
  for (int d = 0; d < draws; ++d) {
    const auto batch = mem.sample(100, rng);
    std::set<const Experience*> unique(batch.begin(), batch.end());
    REQUIRE(unique.size() == 100);
    for (const Experience* e : batch) ++counts[tag(*e)];
  }
  // Inclusion probability 0.1 per item per batch.
  int outside = 0;
  for (int c : counts) outside += !oracle::within_3_sigma(c, draws, 0.1);
  // 3-sigma band: about 0.27% of items are expected outside by chance.
  CHECK(outside <= 10);
}

TEST_CASE("bellman targets") {
  Rng rng(4);
  QNetwork net = init_weights<float>(qnetwork_sizes(3 + 24, 8), rng);

  // Terminal: target = r and the sentinel next state is never evaluated.
  Experience terminal{state_of(0.5f), Action::Trigger, 3.0, AgentState{}, true};
  CHECK(bellman_targets({&terminal}, net, 0.9)[0].value == 3.0);

  // Non-terminal with max Q(s') = 2: output bias 2 on action 4, zero weights.
  QNetwork fixed(qnetwork_sizes(3 + 24, 8));
  fixed.bias(2)[4] = 2.0f;
  fixed.bias(2)[1] = 1.0f;
  Experience step{state_of(0.1f), Action::TopRight, 1.0, state_of(0.2f), false};
  const auto t = bellman_targets({&step}, fixed, 0.9);
  CHECK(t[0].value == doctest::Approx(2.8));
  CHECK(t[0].action == Action::TopRight);

  CHECK(bellman_targets({&step}, net, 0.0)[0].value == 1.0);
  const auto finite = bellman_targets({&step, &terminal}, net, 0.9);
  for (const auto& x : finite) CHECK(std::isfinite(x.value));
  CHECK_THROWS_AS(bellman_targets({&step}, net, 1.5), ConfigError);
}
