#include <doctest.h>

#include <random>
#include <sstream>

#include "hodet/data.hpp"
#include "hodet/errors.hpp"
#include "hodet/evaluation.hpp"

using namespace hodet;

namespace {

Scene scene_with(std::vector<Box> boxes, int side = 64) {
  Scene s{"s", ImageRaster(side, side, 1, 0.2f), {}};
  for (const Box& b : boxes) s.objects.push_back({b, "object"});
  return s;
}

// Naive recount of precision/recall at every rank.
std::vector<std::pair<double, double>> recount(const std::vector<bool>& tp_by_rank, std::size_t num_gt) {
  std::vector<std::pair<double, double>> out;
  int tp = 0;
  for (std::size_t i = 0; i < tp_by_rank.size(); ++i) {
    tp += tp_by_rank[i];
    out.emplace_back(static_cast<double>(tp) / num_gt, static_cast<double>(tp) / (i + 1));
  }
  return out;
}

// Independent greedy descent: recursion over the hierarchy, explicit children.
double oracle_descent_iou(const Box& image, const Box& target, HierarchyScheme scheme, int depth) {
  Box region = image;
  double best = iou(region, target);
  for (int d = 0; d < depth; ++d) {
    std::optional<Box> next;
    double next_iou = best;
    for (const Box& c : children(region, scheme)) {
      const double v = iou(c, target);
      if (v > next_iou) {
        next_iou = v;
        next = c;
      }
    }
    if (!next) break;
    region = *next;
    best = next_iou;
  }
  return best;
}

}  // namespace

TEST_CASE("three-detection micro case") {
  // Two objects in two scenes; detections 0.9 TP, 0.8 FP, 0.7 TP.
  std::vector<Scene> data{scene_with({Box(0, 0, 32, 32)}), scene_with({Box(32, 32, 64, 64)})};
  std::vector<RankedDetection> dets{
      {0, 0, Box(0, 0, 32, 32), 0.9, false},
      {0, 1, Box(40, 0, 64, 20), 0.8, false},
      {1, 0, Box(33, 33, 64, 64), 0.7, false},
  };
  const PRCurve c = compute_pr(dets, data);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].precision == 1.0);
  CHECK(c.points[1].precision == 0.5);
  CHECK(c.points[2].precision == doctest::Approx(2.0 / 3.0));
  CHECK(c.points[2].recall == 1.0);
  const auto naive = recount({true, false, true}, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.points[i].recall == doctest::Approx(naive[i].first));
    CHECK(c.points[i].precision == doctest::Approx(naive[i].second));
  }
  // Envelope: 1 on (0, 0.5], 2/3 on (0.5, 1].
  CHECK(c.average_precision == doctest::Approx(0.5 * 1.0 + 0.5 * 2.0 / 3.0));
}

TEST_CASE("duplicates are false positives and empty lists score zero") {
  std::vector<Scene> data{scene_with({Box(0, 0, 32, 32)})};
  std::vector<RankedDetection> dets{{0, 0, Box(0, 0, 32, 32), 0.9, false}, {0, 1, Box(0, 0, 30, 32), 0.8, false}};
  const PRCurve c = compute_pr(dets, data);
  CHECK(c.points[0].true_positive);
  CHECK_FALSE(c.points[1].true_positive);
  CHECK(c.true_positives == 1);
  CHECK(compute_pr({}, data).average_precision == 0.0);
}

TEST_CASE("PR curve is invariant to positive score scaling") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0), pos(0.0, 40.0), len(4.0, 24.0);
  std::vector<Scene> data;
  std::vector<RankedDetection> dets;
  for (std::size_t s = 0; s < 20; ++s) {
    data.push_back(scene_with({Box(10, 10, 40, 40)}));
    for (std::size_t k = 0; k < 4; ++k) {
      const double x = pos(rng), y = pos(rng);
      dets.push_back({s, k, Box(x, y, x + len(rng), y + len(rng)), u(rng), false});
    }
  }
  const PRCurve a = compute_pr(dets, data);
  for (auto& d : dets) d.score *= 7.5;
  const PRCurve b = compute_pr(dets, data);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].recall == b.points[i].recall);
    CHECK(a.points[i].precision == b.points[i].precision);
  }
  CHECK(a.average_precision == b.average_precision);
  for (std::size_t i = 1; i < a.points.size(); ++i) CHECK(a.points[i].recall >= a.points[i - 1].recall);
}

TEST_CASE("oracle detects node-aligned objects with IoU 1 and misses unreachable ones") {
  const Box node = children(children(Box(0, 0, 64, 64), HierarchyScheme::Overlapped)[1],
                            HierarchyScheme::Overlapped)[4];
  std::vector<Scene> data{scene_with({node}), scene_with({Box(0, 30, 64, 32)})};
  const PRCurve c = oracle_upper_bound(data, HierarchyScheme::Overlapped, 8);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].score == 1.0);
  CHECK(c.points[0].true_positive);
  CHECK_FALSE(c.points[1].true_positive);
  CHECK(c.average_precision == doctest::Approx(0.5));
}

TEST_CASE("oracle recall on uniform boxes: overlapped >= non-overlapped") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> side(6, 58);
  std::vector<Scene> data;
  std::size_t hit_ov = 0, hit_no = 0;
  for (int i = 0; i < 1000; ++i) {
    const int w = side(rng), h = side(rng);
    std::uniform_int_distribution<int> px(0, 64 - w), py(0, 64 - h);
    const int x = px(rng), y = py(rng);
    const Box b(x, y, x + w, y + h);
    data.push_back(scene_with({b}));
    hit_ov += oracle_descent_iou(Box(0, 0, 64, 64), b, HierarchyScheme::Overlapped, 8) >= 0.5;
    hit_no += oracle_descent_iou(Box(0, 0, 64, 64), b, HierarchyScheme::NonOverlapped, 8) >= 0.5;
  }
  const PRCurve ov = oracle_upper_bound(data, HierarchyScheme::Overlapped, 8);
  const PRCurve no = oracle_upper_bound(data, HierarchyScheme::NonOverlapped, 8);
  CHECK(ov.true_positives == hit_ov);
  CHECK(no.true_positives == hit_no);
  CHECK(hit_ov >= hit_no);
  // Scored by IoU, every hit ranks ahead of every miss.
  CHECK(ov.average_precision == doctest::Approx(static_cast<double>(hit_ov) / 1000.0));
}

TEST_CASE("hierarchy enumeration size and cap") {
  CHECK(hierarchy_nodes(Box(0, 0, 64, 64), HierarchyScheme::Overlapped, 3).size() == 156);
  CHECK(hierarchy_nodes(Box(0, 0, 64, 64), HierarchyScheme::Overlapped, 0).size() == 1);
  CHECK_THROWS_AS(hierarchy_nodes(Box(0, 0, 64, 64), HierarchyScheme::Overlapped, 4, 500), TreeTooLarge);
}

TEST_CASE("coverage recall") {
  const Box image(0, 0, 64, 64);
  for (HierarchyScheme scheme : {HierarchyScheme::Overlapped, HierarchyScheme::NonOverlapped}) {
    const auto kids = children(image, scheme);
    CHECK(coverage_recall(scheme, image, 1, std::vector<Box>(kids.begin(), kids.end())) == 1.0);
  }
  // Depth 0 compares against the image box only.
  const std::vector<Box> boxes{Box(0, 0, 64, 40), Box(0, 0, 20, 20), Box(0, 0, 64, 30)};
  const double expected = (iou(image, boxes[0]) >= 0.5) + (iou(image, boxes[1]) >= 0.5) + (iou(image, boxes[2]) >= 0.5);
  CHECK(coverage_recall(HierarchyScheme::Overlapped, image, 0, boxes) == doctest::Approx(expected / 3.0));

  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> side(7, 57);
  std::vector<Box> random_boxes;
  for (int i = 0; i < 300; ++i) {
    const int w = side(rng), h = side(rng);
    std::uniform_int_distribution<int> px(0, 64 - w), py(0, 64 - h);
    const int x = px(rng), y = py(rng);
    random_boxes.emplace_back(x, y, x + w, y + h);
  }
  for (HierarchyScheme scheme : {HierarchyScheme::Overlapped, HierarchyScheme::NonOverlapped}) {
    double prev = 0.0;
    for (int depth = 0; depth <= 5; ++depth) {
      const double c = coverage_recall(scheme, image, depth, random_boxes);
      CHECK(c >= prev);
      prev = c;
    }
  }
  CHECK(coverage_recall(HierarchyScheme::Overlapped, image, 3, random_boxes) >=
        coverage_recall(HierarchyScheme::NonOverlapped, image, 3, random_boxes));
}

TEST_CASE("steps histogram counts successful triggers only") {
  EpisodeTrace immediate;
  immediate.steps.push_back({Box(0, 0, 64, 64), Action::Trigger, 3.0, {}});
  immediate.status = EpisodeStatus::Triggered;
  EpisodeTrace two_moves;
  two_moves.steps = {{Box(0, 0, 64, 64), Action::TopLeft, 1.0, {}},
                     {Box(0, 0, 48, 48), Action::Center, 1.0, {}},
                     {Box(6, 6, 42, 42), Action::Trigger, 3.0, {}}};
  two_moves.status = EpisodeStatus::Triggered;
  EpisodeTrace failed;
  failed.steps.push_back({Box(0, 0, 64, 64), Action::Trigger, -3.0, {}});
  failed.status = EpisodeStatus::Triggered;
  EpisodeTrace limit;
  limit.steps.push_back({Box(0, 0, 64, 64), Action::TopLeft, 1.0, {}});

  const auto h = steps_histogram({immediate, two_moves, failed, limit});
  CHECK(h.size() == 2);
  CHECK(h.at(0) == 1);
  CHECK(h.at(2) == 1);
  CHECK(steps_histogram({failed, limit}).empty());

  std::ostringstream os;
  write_histogram_csv(os, h);
  CHECK(os.str() == "movement_steps,count\n0,1\n2,1\n");
}

TEST_CASE("random baseline is reproducible and bounded by the oracle") {
  SyntheticSpec spec;
  spec.num_scenes = 40;
  spec.max_depth = 2;
  const auto data = generate(spec);
  EnvConfig cfg;
  Rng a(3), b(3);
  const EvalResult r1 = random_baseline(data, cfg, a);
  const EvalResult r2 = random_baseline(data, cfg, b);
  CHECK(r1.curve.average_precision == r2.curve.average_precision);
  CHECK(r1.curve.average_precision > 0.0);
  CHECK(r1.curve.average_precision < 1.0);
  CHECK(r1.curve.average_precision <= oracle_upper_bound(data, cfg.scheme, cfg.max_steps).average_precision);
}

TEST_CASE("agent evaluation ranks every visited region by the trigger output") {
  SyntheticSpec spec;
  spec.num_scenes = 10;
  const auto data = generate(spec);
  EnvConfig cfg;
  // A network that always triggers: output bias favours action 5.
  QNetwork net(qnetwork_sizes(49 + 24, 4));
  net.bias(2)[5] = 1.0f;
  const EvalResult r = evaluate_agent(data, net, cfg);
  REQUIRE(r.traces.size() == 10);
  for (const auto& t : r.traces) {
    CHECK(t.steps.size() == 1);
    CHECK(t.status == EpisodeStatus::Triggered);
  }
  CHECK(r.curve.points.size() == 10);
  std::ostringstream os;
  write_pr_csv(os, r.curve);
  CHECK(os.str().rfind("rank,score,tp,recall,precision\n", 0) == 0);
}
