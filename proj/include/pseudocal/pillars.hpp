#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pseudocal/se3.hpp"

namespace pseudocal {

/// Bird's-eye grid over [x_min, x_max) x [y_min, y_max); points outside the
/// bounds or the z clip band are dropped. Grid dimensions are
/// ceil(extent / cell_size) per axis, each capped at 2048.
struct PillarGridConfig {
  double x_min = -50.0, x_max = 50.0;
  double y_min = -50.0, y_max = 50.0;
  double cell_size = 0.5;
  int max_points_per_pillar = 32;
  double z_clip_min = -3.0, z_clip_max = 5.0;

  int rows() const;  // y axis
  int cols() const;  // x axis
  void validate() const;
};

/// 6 features per cell: [count_norm, mean_dx, mean_dy, mean_z, min_z, max_z].
/// Empty cells are all-zero. count_norm = retained / max_points_per_pillar;
/// mean_dx/mean_dy are offsets from the cell center.
struct PillarImage {
  static constexpr int kFeatureCount = 6;

  int rows = 0;
  int cols = 0;
  std::vector<float> features;  // rows*cols*kFeatureCount, row-major cells
  PillarGridConfig config;

  const float* cell(int row, int col) const {
    return features.data() +
           (static_cast<std::size_t>(row) * cols + col) * kFeatureCount;
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(rows) * cols;
  }
};

/// Buckets points in cloud order, keeping the first max_points_per_pillar
/// per cell.
PillarImage pillarize(const PointCloud& cloud, const PillarGridConfig& cfg);

/// count_norm channel as a rows*cols grid.
std::vector<float> occupancy(const PillarImage& img);

/// factor x factor block aggregation: count_norm = block mean,
/// mean_dx/mean_dy/mean_z = occupancy-weighted means, min_z/max_z over
/// nonempty cells. factor must divide both dimensions.
PillarImage downsample(const PillarImage& img, int factor);

/// Binary blob: "PILR", u32 rows, u32 cols, 8 little-endian f64 config
/// values (x_min, x_max, y_min, y_max, cell_size, max_points_per_pillar,
/// z_clip_min, z_clip_max), then row-major f32 features.
std::vector<std::uint8_t> serialize(const PillarImage& img);
PillarImage deserialize_pillars(std::span<const std::uint8_t> bytes);

/// Cross-correlation of the occupancy grids at an integer cell shift
/// (a sampled at +shift against b), zero-filled outside, normalized by the
/// product of the full-grid L2 norms. Raises no_overlap when either grid is
/// all-zero.
double occupancy_ncc(const PillarImage& a, const PillarImage& b,
                     int row_shift, int col_shift);

}  // namespace pseudocal
