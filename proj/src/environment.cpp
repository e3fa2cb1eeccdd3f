#include "hodet/environment.hpp"

#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "hodet/errors.hpp"

namespace hodet {

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) throw InvalidAction("action index " + std::to_string(index));
  return static_cast<Action>(index);
}

void MemoryVector::push(Action a) {
  for (int i = kSize - 1; i >= kNumActions; --i) values_[i] = values_[i - kNumActions];
  for (int i = 0; i < kNumActions; ++i) values_[i] = 0.0f;
  values_[index_of(a)] = 1.0f;
}

int MemoryVector::count_ones() const {
  int n = 0;
  for (float v : values_) n += v == 1.0f;
  return n;
}

std::optional<Action> MemoryVector::slot(int i) const {
  for (int a = 0; a < kNumActions; ++a) {
    if (values_[i * kNumActions + a] == 1.0f) return static_cast<Action>(a);
  }
  return std::nullopt;
}

std::vector<float> AgentState::to_input() const {
  std::vector<float> x;
  x.reserve(size());
  x.insert(x.end(), descriptor.values.begin(), descriptor.values.end());
  x.insert(x.end(), memory.values().begin(), memory.values().end());
  return x;
}

void Scene::validate() const {
  const Box bounds = image.bounds();
  for (const auto& gt : objects) {
    if (intersection_area(gt.box, bounds) <= 0.0) {
      std::ostringstream msg;
      msg << "scene " << id << ": ground-truth box " << gt.box << " lies outside the image";
      throw InvalidImage(msg.str());
    }
  }
}

double movement_reward(double iou_before, double iou_after) {
  if (iou_after > iou_before) return 1.0;
  if (iou_after < iou_before) return -1.0;
  return 0.0;
}

double terminal_reward(double iou, const RewardParams& params) {
  return iou >= params.tau ? params.eta : -params.eta;
}

const GroundTruth& select_target(const Box& region, const Scene& scene) {
  if (scene.objects.empty()) throw NoGroundTruth("scene " + scene.id + " has no ground truth");
  std::size_t best = 0;
  double best_iou = iou(region, scene.objects[0].box);
  for (std::size_t i = 1; i < scene.objects.size(); ++i) {
    const double v = iou(region, scene.objects[i].box);
    if (v > best_iou) {
      best = i;
      best_iou = v;
    }
  }
  return scene.objects[best];
}

StepResult transition(const Box& region, const AgentState& state, Action action, const Scene& scene,
                      const RegionDescriber& describer, HierarchyScheme scheme, const RewardParams& rewards) {
  const Box& target = select_target(region, scene).box;
  AgentState next = state;
  next.memory.push(action);

  if (action == Action::Trigger) {
    return {region, std::move(next), terminal_reward(iou(region, target), rewards), true};
  }
  const Box child = children(region, scheme)[index_of(action)];
  next.descriptor = describer.describe(child);
  const double reward = movement_reward(iou(region, target), iou(child, target));
  return {child, std::move(next), reward, false};
}

Environment::Environment(const Scene& scene, const EnvConfig& config)
    : scene_(&scene),
      config_(config),
      describer_(scene.image, config.extractor, config.features),
      region_(scene.image.bounds()) {
  if (config_.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  reset();
}

const AgentState& Environment::reset() {
  region_ = scene_->image.bounds();
  state_ = AgentState{describer_.describe(region_), MemoryVector{}};
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult Environment::step(Action action) {
  if (done_) throw Error("step called on a finished episode");
  StepResult result{region_, state_, 0.0, false};
  if (has_ground_truth()) {
    result = transition(region_, state_, action, *scene_, describer_, config_.scheme, config_.rewards);
  } else {
    // Inference on unannotated images: same dynamics, no reward signal.
    result.state.memory.push(action);
    if (is_movement(action)) {
      result.region = children(region_, config_.scheme)[index_of(action)];
      result.state.descriptor = describer_.describe(result.region);
    } else {
      result.done = true;
    }
  }
  ++steps_;
  if (steps_ >= config_.max_steps) result.done = true;
  region_ = result.region;
  state_ = result.state;
  done_ = result.done;
  return result;
}

double Environment::target_iou() const { return iou(region_, select_target(region_, *scene_).box); }

int EpisodeTrace::movement_steps() const {
  int n = 0;
  for (const auto& s : steps) n += is_movement(s.action);
  return n;
}

void write_trace(std::ostream& os, const EpisodeTrace& trace) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    nlohmann::ordered_json line;
    line["step"] = i;
    line["region"] = {s.region.x0(), s.region.y0(), s.region.x1(), s.region.y1()};
    line["action"] = index_of(s.action);
    line["q"] = s.q_values;
    if (s.reward) {
      line["reward"] = *s.reward;
    } else {
      line["reward"] = nullptr;
    }
    os << line.dump() << '\n';
  }
}

std::string trace_to_string(const EpisodeTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

}  // namespace hodet
