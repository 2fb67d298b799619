#include "aslks/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "aslks/common.hpp"

namespace aslks {

void Box::validate() const {
  if (!(x1 < x2) || !(y1 < y2))
    throw SpecError("Box: requires x1 < x2 and y1 < y2");
}

double iou(const Box& a, const Box& b) {
  a.validate();
  b.validate();
  const double ix1 = std::max(a.x1, b.x1), iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2), iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1, ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

namespace {

// Detection order sorted by descending confidence, stable on ties.
std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return order;
}

}  // namespace

double average_precision_50(std::span<const Detection> dets,
                            std::span<const GroundTruth> gts, int class_id) {
  for (const auto& d : dets)
    if (d.class_id != class_id)
      throw SpecError("average_precision_50: detection class " +
                      std::to_string(d.class_id) + " does not match " +
                      std::to_string(class_id));
  for (const auto& g : gts)
    if (g.class_id != class_id)
      throw SpecError("average_precision_50: ground truth class " +
                      std::to_string(g.class_id) + " does not match " +
                      std::to_string(class_id));
  if (gts.empty()) return 0.0;

  const std::vector<std::size_t> order = confidence_order(dets);
  std::vector<bool> matched(gts.size(), false);
  std::vector<double> precision, recall;
  int tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& d = dets[order[rank]];
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (matched[gi] || gts[gi].image_id != d.image_id) continue;
      const double v = iou(d.box, gts[gi].box);
      if (v > best_iou) {  // IoU ties keep the lowest index
        best_iou = v;
        best = int(gi);
      }
    }
    if (best >= 0 && best_iou >= 0.5) {
      matched[best] = true;
      ++tp;
    }
    precision.push_back(double(tp) / double(rank + 1));
    recall.push_back(double(tp) / double(gts.size()));
  }

  // All-point interpolation: area under the precision envelope.
  const std::size_t m = precision.size();
  std::vector<double> mrec(m + 2), mpre(m + 2);
  mrec[0] = 0.0;
  mpre[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mrec[i + 1] = recall[i];
    mpre[i + 1] = precision[i];
  }
  mrec[m + 1] = 1.0;
  mpre[m + 1] = 0.0;
  for (std::size_t i = m + 1; i-- > 0;)
    mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 0; i + 1 < mrec.size(); ++i)
    if (mrec[i + 1] != mrec[i]) ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
  return ap;
}

ApResult map50(std::span<const Detection> dets,
               std::span<const GroundTruth> gts, int n_classes) {
  if (n_classes < 1) throw SpecError("map50: n_classes must be >= 1");
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].class_id < 0 || dets[i].class_id >= n_classes)
      throw SpecError("map50: detection " + std::to_string(i) + " has class " +
                      std::to_string(dets[i].class_id) + " outside [0, " +
                      std::to_string(n_classes) + ")");
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (gts[i].class_id < 0 || gts[i].class_id >= n_classes)
      throw SpecError("map50: ground truth " + std::to_string(i) +
                      " has class " + std::to_string(gts[i].class_id) +
                      " outside [0, " + std::to_string(n_classes) + ")");

  ApResult r;
  r.n_classes = n_classes;
  r.per_class_ap.resize(n_classes, 0.0);
  r.class_has_gt.resize(n_classes, false);
  double sum = 0.0;
  for (int cls = 0; cls < n_classes; ++cls) {
    std::vector<Detection> cd;
    std::vector<GroundTruth> cg;
    for (const auto& d : dets)
      if (d.class_id == cls) cd.push_back(d);
    for (const auto& g : gts)
      if (g.class_id == cls) cg.push_back(g);
    r.class_has_gt[cls] = !cg.empty();
    r.per_class_ap[cls] = average_precision_50(cd, cg, cls);
    sum += r.per_class_ap[cls];
  }
  r.map50 = sum / double(n_classes);
  return r;
}

}  // namespace aslks
