#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "hodet/environment.hpp"
#include "hodet/qnetwork.hpp"

namespace hodet {

struct RankedDetection {
  std::size_t scene = 0;  // index into the dataset
  std::size_t step = 0;   // position within the episode (tie-break)
  Box region;
  double score = 0.0;
  bool matched = false;
};

struct PRPoint {
  double score;
  bool true_positive;
  double recall;
  double precision;
};

struct PRCurve {
  std::vector<PRPoint> points;  // one per ranked detection, best score first
  double average_precision = 0.0;
  std::size_t num_ground_truth = 0;
  std::size_t true_positives = 0;
};

inline constexpr double kDetectionIou = 0.5;

// Ranks detections by score (ties by scene, then step), assigns each to its
// best-IoU ground truth in the same scene and marks it a true positive when
// that IoU is >= 0.5 and the object is still unmatched. AP is the area under
// the monotone precision envelope over all recall points.
PRCurve compute_pr(std::vector<RankedDetection> detections, const std::vector<Scene>& dataset);

// Area under the monotone precision envelope.
double average_precision(const std::vector<PRPoint>& points, std::size_t num_ground_truth);

struct EvalResult {
  PRCurve curve;
  std::vector<EpisodeTrace> traces;
};

// Greedy episodes (no exploration, no forced trigger). Every region in which
// the agent acted becomes a detection scored by its trigger Q-value.
EvalResult evaluate_agent(const std::vector<Scene>& dataset, const QNetwork& net, const EnvConfig& cfg);

// Uniform random actions and uniform random scores in [0,1).
EvalResult random_baseline(const std::vector<Scene>& dataset, const EnvConfig& cfg, Rng& rng);

// Per object: descend to the child with the highest IoU with that object
// until no child improves it or max_steps descents are made. One detection per
// object, scored by its final IoU.
PRCurve oracle_upper_bound(const std::vector<Scene>& dataset, HierarchyScheme scheme, int max_steps);

// Every hierarchy node from depth 0 to max_depth, breadth-first.
// Throws TreeTooLarge above `node_cap` nodes.
std::vector<Box> hierarchy_nodes(const Box& root, HierarchyScheme scheme, int max_depth,
                                 std::size_t node_cap = 2'000'000);

// Fraction of boxes matched at IoU >= 0.5 by some hierarchy node within
// max_steps levels of `image`.
double coverage_recall(HierarchyScheme scheme, const Box& image, int max_steps, const std::vector<Box>& boxes,
                       std::size_t node_cap = 2'000'000);

// Movement steps before a successful trigger, over successful episodes only.
// A trigger is successful when its reward is positive (IoU >= tau).
std::map<int, std::size_t> steps_histogram(const std::vector<EpisodeTrace>& traces);

void write_pr_csv(std::ostream& os, const PRCurve& curve);
void write_histogram_csv(std::ostream& os, const std::map<int, std::size_t>& histogram);

}  // namespace hodet
