#include "pseudocal/samples.hpp"

namespace pseudocal {

void DecalibrationRange::validate() const {
  if (roll_max_deg < 0 || pitch_max_deg < 0 || yaw_max_deg < 0 ||
      trans_max_cm < 0)
    raise(ErrorCode::config_error, "decalibration bounds must be >= 0");
  if (yaw_max_deg > 180.0)
    raise(ErrorCode::config_error, "yaw bound must be <= 180 deg");
}

CalibParams sample_decalibration_params(const DecalibrationRange& r, Rng& rng) {
  r.validate();
  CalibParams p;
  const double roll_max = deg_to_rad(r.roll_max_deg);
  const double pitch_max = deg_to_rad(r.pitch_max_deg);
  const double yaw_max = deg_to_rad(r.yaw_max_deg);
  const double trans_max = r.trans_max_cm / 100.0;
  p.euler.roll = roll_max == 0.0 ? 0.0 : rng.uniform(-roll_max, roll_max);
  p.euler.pitch = pitch_max == 0.0 ? 0.0 : rng.uniform(-pitch_max, pitch_max);
  p.euler.yaw = yaw_max == 0.0 ? 0.0 : rng.uniform(-yaw_max, yaw_max);
  for (int i = 0; i < 3; ++i)
    p.translation[i] =
        trans_max == 0.0 ? 0.0 : rng.uniform(-trans_max, trans_max);
  return p;
}

RigidTransform sample_decalibration(const DecalibrationRange& r, Rng& rng) {
  return params_to_transform(sample_decalibration_params(r, rng));
}

RigidTransform sample_decalibration(const DecalibrationRange& r,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return sample_decalibration(r, rng);
}

CalibSample make_sample(const Scene& scene, const RigidTransform& t_true,
                        const DecalibrationRange& r, std::uint64_t seed,
                        const MakeSampleOptions& options) {
  CalibSample sample;
  sample.lidar_cloud = scene.lidar_cloud;

  DepthMap depth = scene.depth;
  if (options.canny_enabled)
    depth = filter_edges(depth, detect_depth_edges(depth, options.canny));
  const PointCloud pseudo_cam = back_project(depth, scene.intrinsics);
  if (pseudo_cam.empty())
    raise(ErrorCode::empty_sample, "back-projection produced no points");
  sample.pseudo_cloud = apply(camera_to_bev(), pseudo_cam);

  sample.t_true = t_true;
  sample.t_decal = sample_decalibration(r, seed);
  sample.t_init = compose(sample.t_decal, sample.t_true);
  return sample;
}

CalibSample apply_augmentation(const CalibSample& s,
                               const RigidTransform& t_aug) {
  CalibSample out = s;
  out.lidar_cloud = apply(t_aug, s.lidar_cloud);
  out.pseudo_cloud = apply(t_aug, s.pseudo_cloud);
  return out;
}

RigidTransform sample_augmentation(Rng& rng) {
  CalibParams p;
  p.euler.roll = rng.uniform(-deg_to_rad(10.0), deg_to_rad(10.0));
  p.euler.pitch = rng.uniform(-deg_to_rad(10.0), deg_to_rad(10.0));
  p.euler.yaw = rng.uniform(-kPi, kPi);
  for (int i = 0; i < 3; ++i) p.translation[i] = rng.uniform(-2.0, 2.0);
  return params_to_transform(p);
}

}  // namespace pseudocal
