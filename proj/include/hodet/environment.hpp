#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hodet/features.hpp"
#include "hodet/geometry.hpp"
#include "hodet/image.hpp"

namespace hodet {

inline constexpr int kNumActions = 6;

// Movement actions share their index with the child order of `children`.
enum class Action : std::uint8_t { TopLeft = 0, TopRight, BottomLeft, BottomRight, Center, Trigger };

// Throws InvalidAction outside [0, 6).
Action action_from_index(int index);
inline int index_of(Action a) { return static_cast<int>(a); }
inline bool is_movement(Action a) { return a != Action::Trigger; }

// One-hot history of the last four actions, most recent in slot 0.
class MemoryVector {
 public:
  static constexpr int kSlots = 4;
  static constexpr int kSize = kSlots * kNumActions;

  void push(Action a);
  int count_ones() const;
  // Action recorded in a slot, if any.
  std::optional<Action> slot(int i) const;
  const std::array<float, kSize>& values() const { return values_; }

  friend bool operator==(const MemoryVector&, const MemoryVector&) = default;

 private:
  std::array<float, kSize> values_{};
};

// Q-network input: descriptor values followed by the 24 memory entries.
struct AgentState {
  Descriptor descriptor;
  MemoryVector memory;

  std::size_t size() const { return descriptor.values.size() + MemoryVector::kSize; }
  std::vector<float> to_input() const;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct GroundTruth {
  Box box;
  std::string label;
};

struct Scene {
  std::string id;
  ImageRaster image;
  std::vector<GroundTruth> objects;

  // Throws InvalidImage when a ground-truth box misses the image.
  void validate() const;
};

struct RewardParams {
  double eta = 3.0;
  double tau = 0.5;
};

// sign(iou_after - iou_before).
double movement_reward(double iou_before, double iou_after);
// +eta when iou >= tau, -eta otherwise.
double terminal_reward(double iou, const RewardParams& params);

// Ground-truth box with the highest IoU against `region`; ties go to the
// lowest index. Throws NoGroundTruth on an empty scene.
const GroundTruth& select_target(const Box& region, const Scene& scene);

struct EnvConfig {
  HierarchyScheme scheme = HierarchyScheme::Overlapped;
  ExtractorKind extractor = ExtractorKind::Zoom;
  FeatureParams features;
  RewardParams rewards;
  int max_steps = 8;
};

struct StepResult {
  Box region;
  AgentState state;
  double reward;
  bool done;
};

// Stateless transition: movement i descends to children(region)[i] and earns
// sign(dIoU) against the target chosen from the pre-move region; the trigger
// keeps the region and earns +/-eta. The memory vector is shifted either way.
// `done` here reflects only the trigger; step limits are tracked by Environment.
StepResult transition(const Box& region, const AgentState& state, Action action, const Scene& scene,
                      const RegionDescriber& describer, HierarchyScheme scheme, const RewardParams& rewards);

// One episode over one scene. The describer lives as long as the environment,
// so the scene must outlive it.
class Environment {
 public:
  Environment(const Scene& scene, const EnvConfig& config);

  // Full-image region, zero memory.
  const AgentState& reset();
  StepResult step(Action action);

  const Box& region() const { return region_; }
  const AgentState& state() const { return state_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }
  bool has_ground_truth() const { return !scene_->objects.empty(); }
  // IoU of the current region with the current target object.
  double target_iou() const;

 private:
  const Scene* scene_;
  EnvConfig config_;
  RegionDescriber describer_;
  Box region_;
  AgentState state_;
  int steps_ = 0;
  bool done_ = false;
};

enum class EpisodeStatus { Triggered, StepLimit };

struct TraceStep {
  Box region;
  Action action;
  // Absent when the episode ran without ground truth.
  std::optional<double> reward;
  std::array<float, kNumActions> q_values;
};

struct EpisodeTrace {
  std::string scene_id;
  std::vector<TraceStep> steps;
  EpisodeStatus status = EpisodeStatus::StepLimit;

  int movement_steps() const;
};

// One JSON object per line:
// {"step":i,"region":[x0,y0,x1,y1],"action":a,"q":[...6],"reward":r}
void write_trace(std::ostream& os, const EpisodeTrace& trace);
std::string trace_to_string(const EpisodeTrace& trace);

}  // namespace hodet
