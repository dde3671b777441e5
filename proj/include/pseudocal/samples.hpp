#pragma once

#include <cstdint>

#include "pseudocal/depth.hpp"
#include "pseudocal/loss.hpp"
#include "pseudocal/rng.hpp"
#include "pseudocal/scene.hpp"
#include "pseudocal/se3.hpp"

namespace pseudocal {

/// Per-axis uniform decalibration bounds. Rotation in degrees per axis,
/// translation one bound (centimeters) shared by all three axes.
struct DecalibrationRange {
  double roll_max_deg = 0.0;
  double pitch_max_deg = 0.0;
  double yaw_max_deg = 0.0;
  double trans_max_cm = 0.0;

  void validate() const;

  static DecalibrationRange coarse() { return {30.0, 30.0, 180.0, 150.0}; }
  static DecalibrationRange medium() { return {10.0, 10.0, 10.0, 100.0}; }
  static DecalibrationRange small() { return {1.0, 1.0, 1.0, 10.0}; }
};

/// One labeled instance. t_true maps the LiDAR frame to the camera BEV
/// frame; t_decal is the left-composed perturbation, t_init = t_decal *
/// t_true the decalibrated initial estimate. pseudo_cloud is stored in its
/// grid frame (camera BEV); lidar_cloud in the LiDAR frame.
struct CalibSample {
  PointCloud lidar_cloud;
  PointCloud pseudo_cloud;
  RigidTransform t_true;
  RigidTransform t_decal;
  RigidTransform t_init;
};

/// Draw order: roll, pitch, yaw, tx, ty, tz; each axis uniform in its
/// symmetric bound (translation converted to meters).
CalibParams sample_decalibration_params(const DecalibrationRange& r, Rng& rng);
RigidTransform sample_decalibration(const DecalibrationRange& r, Rng& rng);
RigidTransform sample_decalibration(const DecalibrationRange& r,
                                    std::uint64_t seed);

struct MakeSampleOptions {
  bool canny_enabled = true;
  CannyConfig canny{};
};

/// Builds the pseudo cloud from the scene's depth map (Canny edge filtering,
/// back-projection, re-axing into the BEV grid frame) and draws the
/// decalibration. t_true must be the transform the scene was rendered with.
CalibSample make_sample(const Scene& scene, const RigidTransform& t_true,
                        const DecalibrationRange& r, std::uint64_t seed,
                        const MakeSampleOptions& options = {});

/// Transforms both clouds by t_aug in their respective grid frames; the
/// calibration labels (t_true, t_decal, t_init) are untouched.
CalibSample apply_augmentation(const CalibSample& s, const RigidTransform& t_aug);

/// Default augmentation draw: yaw +-180 deg, roll/pitch +-10 deg,
/// translation +-2 m on each axis.
RigidTransform sample_augmentation(Rng& rng);

}  // namespace pseudocal
