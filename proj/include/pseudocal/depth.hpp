#pragma once

#include <cstdint>
#include <vector>

#include "pseudocal/se3.hpp"

namespace pseudocal {

/// Pinhole model in the optical frame: x right, y down, z forward.
struct CameraIntrinsics {
  double f_u = 0.0;  // focal length, pixels
  double f_v = 0.0;
  double c_u = 0.0;  // principal point, pixels
  double c_v = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// Dense metric depth, row-major. depth[i] > 0 wherever valid[i] != 0;
/// non-finite or non-positive samples are forced invalid at construction
/// boundaries.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  static DepthMap invalid_sized(int width, int height);

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  double at(int u, int v) const { return depth[index(u, v)]; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  std::size_t valid_count() const;

  void validate() const;
};

struct EdgeMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edge;

  std::size_t edge_count() const;
};

/// Canny runs on the depth image min-max normalized to [0, 255] over valid
/// pixels; thresholds are in those 8-bit units. Invalid pixels contribute
/// intensity 0 and are never marked as edges.
struct CannyConfig {
  double low_threshold = 50.0;
  double high_threshold = 150.0;
  double gaussian_sigma = 1.0;
  int dilation_radius = 1;

  void validate() const;
};

/// One point per valid pixel in row-major pixel order:
/// z = D(u,v), x = (u - c_u) * z / f_u, y = (v - c_v) * z / f_v.
PointCloud back_project(const DepthMap& d, const CameraIntrinsics& k);

/// Gaussian smooth -> Sobel -> non-maximum suppression -> hysteresis,
/// then dilation by a square structuring element of the configured radius.
EdgeMask detect_depth_edges(const DepthMap& d, const CannyConfig& cfg);

/// Invalidates masked pixels; never creates valid ones.
DepthMap filter_edges(const DepthMap& d, const EdgeMask& m);

/// Z-buffer projection, nearest z wins per pixel; pixel = (round(x*f_u/z + c_u),
/// round(y*f_v/z + c_v)); points with z <= 0 or outside bounds are dropped.
DepthMap render_depth(const PointCloud& cloud, const CameraIntrinsics& k);

}  // namespace pseudocal
