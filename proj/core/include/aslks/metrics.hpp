#pragma once

#include <span>
#include <string>
#include <vector>

namespace aslks {

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  void validate() const;  // x1 < x2, y1 < y2
  double area() const { return (x2 - x1) * (y2 - y1); }
};

// Intersection area / union area; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

struct Detection {
  std::string image_id;
  int class_id = 0;
  Box box;
  double confidence = 0.0;
};

struct GroundTruth {
  std::string image_id;
  int class_id = 0;
  Box box;
};

struct ApResult {
  std::vector<double> per_class_ap;
  std::vector<bool> class_has_gt;  // classes without ground truth are flagged
  double map50 = 0.0;
  int n_classes = 0;
};

// AP at IoU 0.50 for one class: detections sorted by descending confidence
// (stable on ties), greedily matched to the highest-IoU unmatched ground
// truth in the same image (IoU ties broken by lowest index), all-point
// interpolated area under the precision envelope. Inputs must all carry
// class_id; empty ground truth yields 0.
double average_precision_50(std::span<const Detection> dets,
                            std::span<const GroundTruth> gts, int class_id);

// mAP@50 = (1/N) sum AP_i, the plain mean including zero-AP classes.
ApResult map50(std::span<const Detection> dets,
               std::span<const GroundTruth> gts, int n_classes);

}  // namespace aslks
