#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pseudocal/depth.hpp"
#include "pseudocal/se3.hpp"

namespace pseudocal {

struct Box {
  std::array<double, 3> min{};
  std::array<double, 3> max{};
};

/// Synthetic stand-in for a real capture: a ground plane plus axis-aligned
/// boxes, scanned by a spinning multi-channel LiDAR at the world origin and
/// rendered as a depth map from the camera pose implied by the extrinsic.
/// World frame = LiDAR frame: x forward, y left, z up.
struct SceneConfig {
  int n_boxes = 6;
  double box_size_min = 0.5;   // per-dimension edge length draw
  double box_size_max = 2.5;
  double area_extent = 8.0;    // boxes placed in [-extent, extent]^2
  double min_clearance = 1.5;  // keep-out radius around the sensor
  double ground_z = -1.5;
  bool boxes_on_ground = true;  // otherwise centers drawn in the z band below
  double box_z_center_min = 0.0;
  double box_z_center_max = 0.0;

  int lidar_channels = 24;
  double lidar_azimuth_step_deg = 0.9;
  double lidar_elev_min_deg = -25.0;
  double lidar_elev_max_deg = 6.0;
  double max_range = 60.0;

  CameraIntrinsics intrinsics{160.0, 160.0, 79.5, 59.5, 160, 120};

  /// Triangular blur radius (pixels) applied to the rendered depth over
  /// valid neighborhoods; emulates the smooth depth discontinuities of
  /// learned depth maps, which is what produces edge trails. 0 disables.
  int depth_smoothing_radius = 2;

  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Scene {
  SceneConfig config;
  std::vector<Box> boxes;
  double ground_z = 0.0;
  PointCloud lidar_cloud;       // LiDAR frame
  DepthMap depth;               // optical camera frame
  CameraIntrinsics intrinsics;
  RigidTransform t_true;        // LiDAR frame -> camera BEV frame
};

/// Deterministic for a fixed config seed. The camera pose used for the
/// depth render is bev_to_camera() composed with t_true.
Scene generate_scene(const SceneConfig& cfg, const RigidTransform& t_true);

/// Nearest-hit distance of a ray against the scene geometry (ground plane +
/// boxes); unnormalized directions give the hit parameter in units of the
/// direction vector. Empty when nothing is hit within max_param.
struct RayHit {
  double param = 0.0;
  bool on_ground = false;
};
std::optional<RayHit> cast_ray(const std::vector<Box>& boxes, double ground_z,
                               const std::array<double, 3>& origin,
                               const std::array<double, 3>& dir,
                               double max_param);

/// Unsigned distance from a point to the scene surface (ground plane union
/// box boundaries).
double distance_to_scene(const std::vector<Box>& boxes, double ground_z,
                         double x, double y, double z);

}  // namespace pseudocal
