#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aslks/io.hpp"
#include "aslks/metrics.hpp"
#include "aslks/oracle.hpp"
#include "aslks/rng.hpp"
#include "test_util.hpp"

using namespace aslks;

namespace {

Box rand_box(SplitMix64& rng) {
  Box b;
  b.x1 = rng.uniform(0, 80);
  b.y1 = rng.uniform(0, 80);
  b.x2 = b.x1 + rng.uniform(2, 40);
  b.y2 = b.y1 + rng.uniform(2, 40);
  return b;
}

}  // namespace

TEST_CASE("iou examples") {
  CHECK(iou({1, 2, 5, 9}, {1, 2, 5, 9}) == 1.0);
  CHECK(iou({0, 0, 2, 2}, {5, 5, 7, 7}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(iou({5, 0, 2, 2}, {0, 0, 1, 1}), SpecError);
}

TEST_CASE("iou is symmetric, bounded, and 1 only for equal boxes") {
  SplitMix64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const Box a = rand_box(rng), b = rand_box(rng);
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (v == 1.0) {
      CHECK(a.x1 == b.x1);
      CHECK(a.y2 == b.y2);
    }
  }
}

TEST_CASE("single-detection AP hand cases") {
  const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
  SUBCASE("IoU 0.6 gives AP 1") {
    const Detection d{"img0", 0, {0, 2.5, 10, 12.5}, 0.9};  // IoU = 0.6
    CHECK(iou(d.box, gt.box) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(average_precision_50({&d, 1}, {&gt, 1}, 0) == 1.0);
  }
  SUBCASE("IoU 0.4 gives AP 0") {
    const Detection d{"img0", 0, {0, 4.4, 10, 14.4}, 0.9};
    CHECK(iou(d.box, gt.box) < 0.5);
    CHECK(average_precision_50({&d, 1}, {&gt, 1}, 0) == 0.0);
  }
}

TEST_CASE("hit-miss-hit sequence integrates to 5/6") {
  const GroundTruth gts[] = {{"img0", 0, {0, 0, 10, 10}},
                             {"img0", 0, {20, 20, 30, 30}}};
  const Detection dets[] = {{"img0", 0, {0, 0, 10, 10}, 0.9},
                            {"img0", 0, {50, 50, 60, 60}, 0.8},
                            {"img0", 0, {20, 20, 30, 30}, 0.7}};
  const double ap = average_precision_50({dets, 3}, {gts, 2}, 0);
  CHECK(std::abs(ap - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(oracle::exhaustive_average_precision({dets, 3}, {gts, 2}, 0) -
                 5.0 / 6.0) <= 1e-12);
}

TEST_CASE("empty ground truth yields zero AP and a flag") {
  const Detection d{"img0", 0, {0, 0, 10, 10}, 0.9};
  CHECK(average_precision_50({&d, 1}, {}, 0) == 0.0);
  const ApResult both_empty = map50({}, {}, 2);
  CHECK(both_empty.map50 == 0.0);
  CHECK_FALSE(both_empty.class_has_gt[0]);
  CHECK_FALSE(both_empty.class_has_gt[1]);
}

TEST_CASE("matching is per-image") {
  // A perfect box in the wrong image must not match.
  const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
  const Detection d{"img1", 0, {0, 0, 10, 10}, 0.9};
  CHECK(average_precision_50({&d, 1}, {&gt, 1}, 0) == 0.0);
}

TEST_CASE("greedy matching consumes each ground truth once") {
  const GroundTruth gt{"img0", 0, {0, 0, 10, 10}};
  const Detection dets[] = {{"img0", 0, {0, 0, 10, 10}, 0.9},
                            {"img0", 0, {0, 0, 10, 10}, 0.8}};
  // Second detection is a duplicate FP: precision points (1, 1/2) at recall 1.
  CHECK(average_precision_50({dets, 2}, {&gt, 1}, 0) == 1.0);
}

TEST_CASE("map50 is the unweighted mean of per-class APs") {
  const GroundTruth gts[] = {{"img0", 0, {0, 0, 10, 10}},
                             {"img0", 1, {20, 20, 30, 30}}};
  const Detection dets[] = {{"img0", 0, {0, 0, 10, 10}, 0.9},
                            {"img0", 1, {50, 50, 60, 60}, 0.8},
                            {"img0", 1, {20, 20, 30, 30}, 0.6}};
  const ApResult r = map50({dets, 3}, {gts, 2}, 2);
  CHECK(r.per_class_ap[0] == 1.0);
  CHECK(r.per_class_ap[1] == 0.5);
  CHECK(r.map50 == 0.75);
  CHECK(map50({}, {gts, 2}, 2).map50 == 0.0);
}

TEST_CASE("class ids outside [0, N) are rejected") {
  const Detection d{"img0", 2, {0, 0, 10, 10}, 0.9};
  CHECK_THROWS_AS(map50({&d, 1}, {}, 2), SpecError);
  const GroundTruth g{"img0", -1, {0, 0, 10, 10}};
  CHECK_THROWS_AS(map50({}, {&g, 1}, 2), SpecError);
}

TEST_CASE("AP is invariant under strictly monotone confidence transforms") {
  SplitMix64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Detection> dets;
    std::vector<GroundTruth> gts;
    for (int i = 0; i < 3; ++i) gts.push_back({"img0", 0, rand_box(rng)});
    for (int i = 0; i < 5; ++i) {
      Detection d{"img0", 0, rand_box(rng), rng.uniform(0.05, 0.95)};
      if (i < 3 && rng.next_unit() < 0.6) d.box = gts[i].box;
      dets.push_back(std::move(d));
    }
    const double base = average_precision_50(dets, gts, 0);
    for (auto& d : dets) d.confidence = 0.5 + std::atan(d.confidence) / 4.0;
    CHECK(average_precision_50(dets, gts, 0) == base);
  }
}

TEST_CASE("duplicate lower-confidence detections never increase AP") {
  SplitMix64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Detection> dets;
    std::vector<GroundTruth> gts;
    for (int i = 0; i < 2; ++i) gts.push_back({"img0", 0, rand_box(rng)});
    dets.push_back({"img0", 0, gts[0].box, 0.9});
    dets.push_back({"img0", 0, rand_box(rng), rng.uniform(0.3, 0.8)});
    const double base = average_precision_50(dets, gts, 0);
    dets.push_back({"img0", 0, gts[0].box, 0.05});
    CHECK(average_precision_50(dets, gts, 0) <= base + 1e-15);
  }
}

TEST_CASE("randomized instances match the exhaustive oracle exactly") {
  for (int inst = 0; inst < 200; ++inst) {
    SplitMix64 rng(5000 + inst);
    std::vector<Detection> dets;
    std::vector<GroundTruth> gts;
    const int n_gt = int(rng.uniform_int(0, 3));
    const int n_det = int(rng.uniform_int(0, 5));
    for (int i = 0; i < n_gt; ++i)
      gts.push_back(
          {"img" + std::to_string(rng.uniform_int(0, 1)), 0, rand_box(rng)});
    for (int i = 0; i < n_det; ++i) {
      Detection d;
      d.image_id = "img" + std::to_string(rng.uniform_int(0, 1));
      d.class_id = 0;
      if (!gts.empty() && rng.next_unit() < 0.5) {
        const Box& base = gts[std::size_t(rng.uniform_int(0, n_gt - 1))].box;
        d.box = {base.x1 + rng.uniform(-3, 3), base.y1 + rng.uniform(-3, 3),
                 base.x2 + rng.uniform(-3, 3), base.y2 + rng.uniform(-3, 3)};
        if (d.box.x2 <= d.box.x1) d.box.x2 = d.box.x1 + 1;
        if (d.box.y2 <= d.box.y1) d.box.y2 = d.box.y1 + 1;
      } else {
        d.box = rand_box(rng);
      }
      d.confidence = rng.uniform(0.01, 1.0);
      dets.push_back(std::move(d));
    }
    const double got = average_precision_50(dets, gts, 0);
    const double want = oracle::exhaustive_average_precision(dets, gts, 0);
    CHECK(std::abs(got - want) <= 1e-12);
  }
}

TEST_CASE("detection and ground-truth files parse with exact field names") {
  const std::string det_path = testutil::temp_path("dets");
  const std::string gt_path = testutil::temp_path("gts");
  testutil::write_file(det_path, R"([
    {"image_id": "a", "class_id": 0, "box": [0, 0, 10, 10], "confidence": 0.75},
    {"image_id": 3, "class_id": 1, "box": [1, 1, 4, 4], "confidence": 0.5}
  ])");
  testutil::write_file(gt_path, R"([
    {"image_id": "a", "class_id": 0, "box": [0, 0, 10, 10]}
  ])");
  const auto dets = load_detections(det_path);
  const auto gts = load_ground_truth(gt_path);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].image_id == "a");
  CHECK(dets[1].image_id == "3");  // integer ids normalize to strings
  CHECK(dets[1].confidence == 0.5);
  REQUIRE(gts.size() == 1);
  std::remove(det_path.c_str());
  std::remove(gt_path.c_str());
}

TEST_CASE("schema violations name the record index") {
  const std::string path = testutil::temp_path("bad_dets");
  SUBCASE("missing confidence") {
    testutil::write_file(
        path, R"([{"image_id": "a", "class_id": 0, "box": [0, 0, 1, 1]}])");
    CHECK_THROWS_WITH_AS(load_detections(path), doctest::Contains("record 0"),
                         ParseError);
  }
  SUBCASE("bad box arity") {
    testutil::write_file(
        path,
        R"([{"image_id": "a", "class_id": 0, "box": [0, 0, 1], "confidence": 1}])");
    CHECK_THROWS_WITH_AS(load_detections(path), doctest::Contains("record 0"),
                         ParseError);
  }
  SUBCASE("confidence outside [0, 1]") {
    testutil::write_file(
        path,
        R"([{"image_id": "a", "class_id": 0, "box": [0, 0, 1, 1], "confidence": 1.5}])");
    CHECK_THROWS_AS(load_detections(path), ParseError);
  }
  std::remove(path.c_str());
}

TEST_CASE("fixed four-decimal report formatting") {
  ApResult r;
  r.n_classes = 2;
  r.per_class_ap = {1.0, 0.5};
  r.class_has_gt = {true, false};
  r.map50 = 0.75;
  const std::string text = ap_result_json(r);
  CHECK(text.find("\"map50\": 0.7500") != std::string::npos);
  CHECK(text.find("[1.0000, 0.5000]") != std::string::npos);
  CHECK(text.find("\"classes_without_gt\": [1]") != std::string::npos);
}
