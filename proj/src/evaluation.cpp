#include "hodet/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "hodet/errors.hpp"
#include "hodet/trainer.hpp"

namespace hodet {

double average_precision(const std::vector<PRPoint>& points, std::size_t num_ground_truth) {
  if (points.empty() || num_ground_truth == 0) return 0.0;
  // Envelope from the right: p_interp(i) = max_{j >= i} precision(j).
  std::vector<double> envelope(points.size());
  double running = 0.0;
  for (std::size_t i = points.size(); i-- > 0;) {
    running = std::max(running, points[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].recall > prev_recall) {
      ap += (points[i].recall - prev_recall) * envelope[i];
      prev_recall = points[i].recall;
    }
  }
  return ap;
}

PRCurve compute_pr(std::vector<RankedDetection> detections, const std::vector<Scene>& dataset) {
  PRCurve curve;
  std::vector<std::vector<bool>> taken(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    curve.num_ground_truth += dataset[s].objects.size();
    taken[s].assign(dataset[s].objects.size(), false);
  }

  std::stable_sort(detections.begin(), detections.end(), [](const RankedDetection& a, const RankedDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.scene != b.scene) return a.scene < b.scene;
    return a.step < b.step;
  });

  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < detections.size(); ++rank) {
    RankedDetection& d = detections[rank];
    const auto& objects = dataset.at(d.scene).objects;
    double best = 0.0;
    std::size_t best_idx = objects.size();
    for (std::size_t g = 0; g < objects.size(); ++g) {
      const double v = iou(d.region, objects[g].box);
      if (v > best) {
        best = v;
        best_idx = g;
      }
    }
    if (best_idx < objects.size() && best >= kDetectionIou && !taken[d.scene][best_idx]) {
      taken[d.scene][best_idx] = true;
      d.matched = true;
      ++tp;
    }
    const double recall =
        curve.num_ground_truth ? static_cast<double>(tp) / static_cast<double>(curve.num_ground_truth) : 0.0;
    curve.points.push_back({d.score, d.matched, recall, static_cast<double>(tp) / static_cast<double>(rank + 1)});
  }
  curve.true_positives = tp;
  curve.average_precision = average_precision(curve.points, curve.num_ground_truth);
  return curve;
}

namespace {

void collect_detections(const EpisodeTrace& trace, std::size_t scene, const std::vector<double>* scores,
                        std::vector<RankedDetection>& out) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    const double score = scores ? (*scores)[i] : static_cast<double>(s.q_values[index_of(Action::Trigger)]);
    out.push_back({scene, i, s.region, score, false});
  }
}

}  // namespace

EvalResult evaluate_agent(const std::vector<Scene>& dataset, const QNetwork& net, const EnvConfig& cfg) {
  EvalResult result;
  std::vector<RankedDetection> detections;
  for (std::size_t si = 0; si < dataset.size(); ++si) {
    Environment env(dataset[si], cfg);
    EpisodeTrace trace;
    trace.scene_id = dataset[si].id;
    while (!env.done()) {
      const Box region = env.region();
      const auto q = q_values(net, env.state());
      const Action action = greedy_action(q);
      const StepResult r = env.step(action);
      trace.steps.push_back({region, action, env.has_ground_truth() ? std::optional(r.reward) : std::nullopt, q});
      if (action == Action::Trigger) trace.status = EpisodeStatus::Triggered;
    }
    collect_detections(trace, si, nullptr, detections);
    result.traces.push_back(std::move(trace));
  }
  result.curve = compute_pr(std::move(detections), dataset);
  return result;
}

EvalResult random_baseline(const std::vector<Scene>& dataset, const EnvConfig& cfg, Rng& rng) {
  EvalResult result;
  std::vector<RankedDetection> detections;
  std::uniform_int_distribution<int> any_action(0, kNumActions - 1);
  std::uniform_real_distribution<double> any_score(0.0, 1.0);
  for (std::size_t si = 0; si < dataset.size(); ++si) {
    Environment env(dataset[si], cfg);
    EpisodeTrace trace;
    trace.scene_id = dataset[si].id;
    std::vector<double> scores;
    while (!env.done()) {
      const Box region = env.region();
      const Action action = static_cast<Action>(any_action(rng));
      const double score = any_score(rng);
      const StepResult r = env.step(action);
      std::array<float, kNumActions> q{};
      q[index_of(Action::Trigger)] = static_cast<float>(score);
      trace.steps.push_back({region, action, env.has_ground_truth() ? std::optional(r.reward) : std::nullopt, q});
      scores.push_back(score);
      if (action == Action::Trigger) trace.status = EpisodeStatus::Triggered;
    }
    collect_detections(trace, si, &scores, detections);
    result.traces.push_back(std::move(trace));
  }
  result.curve = compute_pr(std::move(detections), dataset);
  return result;
}

PRCurve oracle_upper_bound(const std::vector<Scene>& dataset, HierarchyScheme scheme, int max_steps) {
  std::vector<RankedDetection> detections;
  for (std::size_t si = 0; si < dataset.size(); ++si) {
    const auto& objects = dataset[si].objects;
    for (std::size_t g = 0; g < objects.size(); ++g) {
      const Box& target = objects[g].box;
      Box region = dataset[si].image.bounds();
      double current = iou(region, target);
      for (int step = 0; step < max_steps; ++step) {
        const auto kids = children(region, scheme);
        std::size_t best = 0;
        double best_iou = iou(kids[0], target);
        for (std::size_t k = 1; k < kids.size(); ++k) {
          const double v = iou(kids[k], target);
          if (v > best_iou) {
            best = k;
            best_iou = v;
          }
        }
        if (best_iou <= current) break;
        region = kids[best];
        current = best_iou;
      }
      detections.push_back({si, g, region, current, false});
    }
  }
  return compute_pr(std::move(detections), dataset);
}

std::vector<Box> hierarchy_nodes(const Box& root, HierarchyScheme scheme, int max_depth, std::size_t node_cap) {
  if (max_depth < 0) throw ConfigError("hierarchy depth must be non-negative");
  // 1 + 5 + ... + 5^d
  double expected = 0.0, level = 1.0;
  for (int d = 0; d <= max_depth; ++d, level *= kNumChildren) expected += level;
  if (expected > static_cast<double>(node_cap)) {
    throw TreeTooLarge("hierarchy of depth " + std::to_string(max_depth) + " exceeds node cap " +
                       std::to_string(node_cap));
  }
  std::vector<Box> nodes{root};
  nodes.reserve(static_cast<std::size_t>(expected));
  std::size_t level_begin = 0;
  for (int d = 0; d < max_depth; ++d) {
    const std::size_t level_end = nodes.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (const Box& c : children(nodes[i], scheme)) nodes.push_back(c);
    }
    level_begin = level_end;
  }
  return nodes;
}

double coverage_recall(HierarchyScheme scheme, const Box& image, int max_steps, const std::vector<Box>& boxes,
                       std::size_t node_cap) {
  if (boxes.empty()) return 0.0;
  const std::vector<Box> nodes = hierarchy_nodes(image, scheme, max_steps, node_cap);
  std::size_t covered = 0;
  for (const Box& b : boxes) {
    for (const Box& n : nodes) {
      if (iou(n, b) >= kDetectionIou) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(boxes.size());
}

std::map<int, std::size_t> steps_histogram(const std::vector<EpisodeTrace>& traces) {
  std::map<int, std::size_t> hist;
  for (const EpisodeTrace& t : traces) {
    if (t.status != EpisodeStatus::Triggered || t.steps.empty()) continue;
    const auto& reward = t.steps.back().reward;
    if (reward && *reward > 0.0) ++hist[t.movement_steps()];
  }
  return hist;
}

void write_pr_csv(std::ostream& os, const PRCurve& curve) {
  os << "rank,score,tp,recall,precision\n";
  os << std::setprecision(10);
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const PRPoint& p = curve.points[i];
    os << i + 1 << ',' << p.score << ',' << (p.true_positive ? 1 : 0) << ',' << p.recall << ',' << p.precision
       << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const std::map<int, std::size_t>& histogram) {
  os << "movement_steps,count\n";
  for (const auto& [steps, count] : histogram) os << steps << ',' << count << '\n';
}

}  // namespace hodet
