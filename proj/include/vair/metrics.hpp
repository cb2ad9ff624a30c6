#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vair/density_grid.hpp"
#include "vair/geometry.hpp"
#include "vair/mesh.hpp"

namespace vair {

// Rejection sampling against the field: uniform draws in the field bounds,
// kept while the trilinear density is >= threshold, until n points or the
// 1000*n draw budget. No acceptances yields an empty cloud with a warning.
PointCloud extract_points(const DensityGrid& field, double threshold,
                          std::size_t n, std::uint64_t seed);

// The printed masked formula ((P ∩ G) ∩ G)/(P ∪ G) reduces to the unmasked
// ratio; the recall-style variant |P ∩ G|/|G| is what separates the two in
// practice, so all three are exposed.
enum class IouVariant { kLiteralMasked, kUnmasked, kAlternateMasked };

double iou(const VoxelOccupancy& pred, const VoxelOccupancy& gt,
           IouVariant variant);

// Symmetric Chamfer with L1 point norms: half the mean nearest distance in
// each direction. Exact (KD-tree), matches brute force.
double chamfer_l1(const PointCloud& a, const PointCloud& b);

struct MetricReport {
  double iou_masked = 0;          // recall-style variant, the headline number
  double iou_masked_literal = 0;  // formula as printed
  double iou_unmasked = 0;
  double cd_l1 = 0;
  double cd_l1_x1000 = 0;
  std::size_t pred_occupied = 0, gt_occupied = 0;
};

struct EvalConfig {
  int voxel_dim = 64;
  std::size_t gt_samples = 500000;  // only used for mesh ground truth
  std::uint64_t seed = 1;
  double bounds_pad = 0.05;  // padding when bounds derive from the gt bbox
};

// Voxelizes both clouds over shared bounds (given, or the gt bounding box
// padded bounds_pad with degenerate axes widened) and computes all metrics.
MetricReport evaluate(const PointCloud& pred, const PointCloud& gt,
                      const Box3* bounds, const EvalConfig& cfg = {});

// Mesh ground truth: area-uniform sample of gt_samples points first.
MetricReport evaluate(const PointCloud& pred, const TriMesh& gt,
                      const Box3* bounds, const EvalConfig& cfg = {});

nlohmann::json report_json(const MetricReport& r);

// aligned columns in the order IOU_m, IOU_un, CD-L1 x 1000
std::string report_table_header();
std::string report_table_row(const std::string& label, const MetricReport& r);

}  // namespace vair
