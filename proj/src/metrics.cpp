#include "vair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vair/log.hpp"
#include "vair/rng.hpp"
#include "vair/synthgen.hpp"
#include "vair/threading.hpp"

namespace vair {

namespace {

double l1(const Vec3& a, const Vec3& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

// Balanced KD-tree over a fixed cloud, median split on the cycling axis.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& pts) : pts_(pts) {
    if (pts.empty()) throw std::invalid_argument("KdTree3: empty cloud");
    order_.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order_[i] = i;
    nodes_.reserve(pts.size());
    root_ = build(0, pts.size(), 0);
  }

  double nearest_l1(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  struct Node {
    std::size_t point;
    int axis;
    int left = -1, right = -1;
  };

  int build(std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    int axis = depth % 3;
    std::size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + long(lo), order_.begin() + long(mid),
                     order_.begin() + long(hi),
                     [&](std::size_t a, std::size_t b) {
                       return pts_[a][axis] < pts_[b][axis];
                     });
    int id = int(nodes_.size());
    nodes_.push_back({order_[mid], axis});
    int l = build(lo, mid, depth + 1);
    int r = build(mid + 1, hi, depth + 1);
    nodes_[std::size_t(id)].left = l;
    nodes_[std::size_t(id)].right = r;
    return id;
  }

  void search(int id, const Vec3& q, double& best) const {
    if (id < 0) return;
    const Node& n = nodes_[std::size_t(id)];
    best = std::min(best, l1(pts_[n.point], q));
    double diff = q[n.axis] - pts_[n.point][n.axis];
    int near = diff < 0 ? n.left : n.right;
    int far = diff < 0 ? n.right : n.left;
    search(near, q, best);
    // the split-plane L1 gap lower-bounds any distance across it
    if (std::abs(diff) < best) search(far, q, best);
  }

  const std::vector<Vec3>& pts_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

double directed_mean_l1(const std::vector<Vec3>& from, const KdTree3& to) {
  std::vector<double> d(from.size());
  parallel_for(from.size(), [&](std::size_t i) { d[i] = to.nearest_l1(from[i]); });
  double sum = 0;
  for (double v : d) sum += v;  // fixed order keeps the reduction deterministic
  return sum / double(from.size());
}

Box3 eval_bounds(const PointCloud& gt, double pad) {
  Box3 b = gt.bbox().padded(pad);
  // planar ground truth collapses an axis; widen it so the grids are valid
  constexpr double kMinExtent = 0.1;
  for (int a = 0; a < 3; ++a) {
    double lo = a == 0 ? b.min.x : a == 1 ? b.min.y : b.min.z;
    double hi = a == 0 ? b.max.x : a == 1 ? b.max.y : b.max.z;
    if (hi - lo < kMinExtent) {
      double c = (lo + hi) / 2;
      lo = c - kMinExtent / 2;
      hi = c + kMinExtent / 2;
      if (a == 0) { b.min.x = lo; b.max.x = hi; }
      else if (a == 1) { b.min.y = lo; b.max.y = hi; }
      else { b.min.z = lo; b.max.z = hi; }
    }
  }
  return b;
}

}  // namespace

PointCloud extract_points(const DensityGrid& field, double threshold,
                          std::size_t n, std::uint64_t seed) {
  if (threshold <= 0)
    throw std::invalid_argument("extract_points: threshold must be > 0");
  Rng rng = substream(seed, "extract");
  PointCloud out;
  std::size_t budget = 1000 * n;
  for (std::size_t draw = 0; draw < budget && out.points.size() < n; ++draw) {
    Vec3 p{rng.uniform(field.bounds.min.x, field.bounds.max.x),
           rng.uniform(field.bounds.min.y, field.bounds.max.y),
           rng.uniform(field.bounds.min.z, field.bounds.max.z)};
    if (trilinear_sample(field, p) >= threshold) out.points.push_back(p);
  }
  if (out.empty())
    log_warn("extract_points: no density >= ", threshold,
             " found within the draw budget");
  return out;
}

double iou(const VoxelOccupancy& pred, const VoxelOccupancy& gt,
           IouVariant variant) {
  if (pred.dim != gt.dim)
    throw std::invalid_argument("iou: grid dims differ");
  const Box3 &a = pred.bounds, &b = gt.bounds;
  if (a.min.x != b.min.x || a.min.y != b.min.y || a.min.z != b.min.z ||
      a.max.x != b.max.x || a.max.y != b.max.y || a.max.z != b.max.z)
    throw std::invalid_argument("iou: grid bounds differ");

  std::size_t inter = 0, uni = 0, gt_count = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    bool p = pred.bits[i] != 0, g = gt.bits[i] != 0;
    inter += p && g;
    uni += p || g;
    gt_count += g;
  }
  if (uni == 0) {
    log_warn("iou: both grids empty; reporting vacuous agreement 1.0");
    return 1.0;
  }
  switch (variant) {
    case IouVariant::kLiteralMasked:  // ((P ∩ G) ∩ G) = P ∩ G
    case IouVariant::kUnmasked:
      return double(inter) / double(uni);
    case IouVariant::kAlternateMasked:
      if (gt_count == 0) {
        log_warn("iou: empty ground truth; masked variant reported as 0");
        return 0.0;
      }
      return double(inter) / double(gt_count);
  }
  return 0.0;
}

double chamfer_l1(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("chamfer_l1: empty cloud");
  KdTree3 ta(a.points), tb(b.points);
  return 0.5 * directed_mean_l1(a.points, tb) +
         0.5 * directed_mean_l1(b.points, ta);
}

MetricReport evaluate(const PointCloud& pred, const PointCloud& gt,
                      const Box3* bounds, const EvalConfig& cfg) {
  if (pred.empty()) throw std::invalid_argument("evaluate: empty prediction");
  if (gt.empty()) throw std::invalid_argument("evaluate: empty ground truth");

  Box3 box = bounds ? *bounds : eval_bounds(gt, cfg.bounds_pad);
  VoxelOccupancy vp = voxelize(pred, cfg.voxel_dim, box);
  VoxelOccupancy vg = voxelize(gt, cfg.voxel_dim, box);

  MetricReport r;
  r.iou_masked = iou(vp, vg, IouVariant::kAlternateMasked);
  r.iou_masked_literal = iou(vp, vg, IouVariant::kLiteralMasked);
  r.iou_unmasked = iou(vp, vg, IouVariant::kUnmasked);
  r.cd_l1 = chamfer_l1(pred, gt);
  r.cd_l1_x1000 = r.cd_l1 * 1000.0;
  r.pred_occupied = vp.count();
  r.gt_occupied = vg.count();
  return r;
}

MetricReport evaluate(const PointCloud& pred, const TriMesh& gt,
                      const Box3* bounds, const EvalConfig& cfg) {
  Rng rng = substream(cfg.seed, "eval-gt");
  PointCloud cloud = sample_surface(gt, int(cfg.gt_samples), rng);
  return evaluate(pred, cloud, bounds, cfg);
}

nlohmann::json report_json(const MetricReport& r) {
  return nlohmann::json{{"iou_masked", r.iou_masked},
                        {"iou_masked_literal", r.iou_masked_literal},
                        {"iou_unmasked", r.iou_unmasked},
                        {"cd_l1", r.cd_l1},
                        {"cd_l1_x1000", r.cd_l1_x1000},
                        {"counts",
                         {{"pred_occupied", r.pred_occupied},
                          {"gt_occupied", r.gt_occupied}}}};
}

std::string report_table_header() {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %12s", "scene", "IOU_m",
                "IOU_un", "CD-L1x1000");
  return buf;
}

std::string report_table_row(const std::string& label, const MetricReport& r) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-16s %8.4f %8.4f %12.4f", label.c_str(),
                r.iou_masked, r.iou_unmasked, r.cd_l1_x1000);
  return buf;
}

}  // namespace vair
