#include "pseudocal/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pseudocal/rng.hpp"

namespace pseudocal {

void SceneConfig::validate() const {
  if (n_boxes < 1) raise(ErrorCode::config_error, "n_boxes must be >= 1");
  if (!(box_size_min > 0.0) || !(box_size_max >= box_size_min))
    raise(ErrorCode::config_error, "invalid box size range");
  if (!(area_extent > 0.0))
    raise(ErrorCode::config_error, "area_extent must be positive");
  if (lidar_channels < 2)
    raise(ErrorCode::config_error, "lidar_channels must be >= 2");
  if (!(lidar_azimuth_step_deg > 0.0) || lidar_azimuth_step_deg > 120.0)
    raise(ErrorCode::config_error, "invalid lidar_azimuth_step");
  if (!(lidar_elev_max_deg > lidar_elev_min_deg))
    raise(ErrorCode::config_error, "elevation span is empty");
  if (!(max_range > 0.0))
    raise(ErrorCode::config_error, "max_range must be positive");
  if (depth_smoothing_radius < 0)
    raise(ErrorCode::config_error, "depth_smoothing_radius must be >= 0");
  intrinsics.validate();
}

namespace {

// Slab test; dir components may be zero and the parameter is in units of
// the (possibly unnormalized) direction vector.
bool ray_box(const Box& b, const std::array<double, 3>& o,
             const std::array<double, 3>& d, double& t_hit) {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < b.min[i] || o[i] > b.max[i]) return false;
      continue;
    }
    double t0 = (b.min[i] - o[i]) / d[i];
    double t1 = (b.max[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (t_far < 0.0) return false;
  t_hit = (t_near > 0.0) ? t_near : t_far;
  return t_hit > 0.0;
}

DepthMap smooth_depth(const DepthMap& d, int radius) {
  if (radius <= 0) return d;
  const int w = d.width, h = d.height;
  std::vector<double> weights(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    weights[i + radius] = static_cast<double>(radius + 1 - std::abs(i));

  auto pass = [&](const DepthMap& src, bool horizontal) {
    DepthMap out = src;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = src.index(x, y);
        if (!src.valid[i]) continue;
        double acc = 0.0, wsum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int nx = horizontal ? x + k : x;
          const int ny = horizontal ? y : y + k;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const std::size_t j = src.index(nx, ny);
          if (!src.valid[j]) continue;
          acc += weights[k + radius] * src.depth[j];
          wsum += weights[k + radius];
        }
        out.depth[i] = acc / wsum;
      }
    return out;
  };
  return pass(pass(d, true), false);
}

}  // namespace

std::optional<RayHit> cast_ray(const std::vector<Box>& boxes, double ground_z,
                               const std::array<double, 3>& origin,
                               const std::array<double, 3>& dir,
                               double max_param) {
  double best = max_param;
  bool found = false, on_ground = false;
  if (dir[2] != 0.0) {
    const double t = (ground_z - origin[2]) / dir[2];
    if (t > 0.0 && t < best) {
      best = t;
      found = true;
      on_ground = true;
    }
  }
  for (const Box& b : boxes) {
    double t;
    if (ray_box(b, origin, dir, t) && t < best) {
      best = t;
      found = true;
      on_ground = false;
    }
  }
  if (!found) return std::nullopt;
  return RayHit{best, on_ground};
}

double distance_to_scene(const std::vector<Box>& boxes, double ground_z,
                         double x, double y, double z) {
  double best = std::abs(z - ground_z);
  for (const Box& b : boxes) {
    // Distance to the box boundary: outside -> clamp distance, inside ->
    // distance to the nearest face.
    const double dx = std::max({b.min[0] - x, 0.0, x - b.max[0]});
    const double dy = std::max({b.min[1] - y, 0.0, y - b.max[1]});
    const double dz = std::max({b.min[2] - z, 0.0, z - b.max[2]});
    double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (d == 0.0) {
      d = std::min({x - b.min[0], b.max[0] - x, y - b.min[1], b.max[1] - y,
                    z - b.min[2], b.max[2] - z});
    }
    best = std::min(best, d);
  }
  return best;
}

Scene generate_scene(const SceneConfig& cfg, const RigidTransform& t_true) {
  cfg.validate();
  Scene scene;
  scene.config = cfg;
  scene.ground_z = cfg.ground_z;
  scene.intrinsics = cfg.intrinsics;
  scene.t_true = t_true;

  Rng rng(cfg.rng_seed);
  scene.boxes.reserve(cfg.n_boxes);
  int guard = 0;
  while (static_cast<int>(scene.boxes.size()) < cfg.n_boxes) {
    if (++guard > cfg.n_boxes * 200)
      raise(ErrorCode::config_error,
            "cannot place boxes: clearance/extent too tight");
    const double sx = rng.uniform(cfg.box_size_min, cfg.box_size_max);
    const double sy = rng.uniform(cfg.box_size_min, cfg.box_size_max);
    const double sz = rng.uniform(cfg.box_size_min, cfg.box_size_max);
    const double cx = rng.uniform(-cfg.area_extent, cfg.area_extent);
    const double cy = rng.uniform(-cfg.area_extent, cfg.area_extent);
    if (std::hypot(cx, cy) < cfg.min_clearance + 0.5 * std::max(sx, sy))
      continue;
    double z_lo, z_hi;
    if (cfg.boxes_on_ground) {
      z_lo = cfg.ground_z;
      z_hi = cfg.ground_z + sz;
    } else {
      const double cz = rng.uniform(cfg.box_z_center_min, cfg.box_z_center_max);
      z_lo = cz - 0.5 * sz;
      z_hi = cz + 0.5 * sz;
    }
    scene.boxes.push_back(Box{{cx - 0.5 * sx, cy - 0.5 * sy, z_lo},
                              {cx + 0.5 * sx, cy + 0.5 * sy, z_hi}});
  }

  // Spinning scan: elevation rings x azimuth steps, nearest hit.
  const std::array<double, 3> lidar_origin{0.0, 0.0, 0.0};
  const int n_az = static_cast<int>(std::floor(360.0 / cfg.lidar_azimuth_step_deg));
  for (int ring = 0; ring < cfg.lidar_channels; ++ring) {
    const double elev =
        deg_to_rad(cfg.lidar_elev_min_deg +
                   (cfg.lidar_elev_max_deg - cfg.lidar_elev_min_deg) * ring /
                       (cfg.lidar_channels - 1));
    const double ce = std::cos(elev), se = std::sin(elev);
    for (int a = 0; a < n_az; ++a) {
      const double az = deg_to_rad(a * cfg.lidar_azimuth_step_deg);
      const std::array<double, 3> dir{ce * std::cos(az), ce * std::sin(az), se};
      const auto hit = cast_ray(scene.boxes, cfg.ground_z, lidar_origin, dir,
                                cfg.max_range);
      if (!hit) continue;
      scene.lidar_cloud.add(hit->param * dir[0], hit->param * dir[1],
                            hit->param * dir[2],
                            hit->on_ground ? 0.2f : 0.7f);
    }
  }

  // Depth render from the optical camera pose implied by t_true.
  const RigidTransform cam_from_world = compose(bev_to_camera(), t_true);
  const RigidTransform world_from_cam = inverse(cam_from_world);
  const std::array<double, 3> cam_origin = world_from_cam.translation;
  const CameraIntrinsics& k = cfg.intrinsics;
  DepthMap depth = DepthMap::invalid_sized(k.width, k.height);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      // Unnormalized direction with unit optical-axis component, so the hit
      // parameter is directly the depth.
      const double dcx = (u - k.c_u) / k.f_u;
      const double dcy = (v - k.c_v) / k.f_v;
      std::array<double, 3> dir_world;
      for (int i = 0; i < 3; ++i)
        dir_world[i] = world_from_cam.rotation(i, 0) * dcx +
                       world_from_cam.rotation(i, 1) * dcy +
                       world_from_cam.rotation(i, 2);
      const auto hit = cast_ray(scene.boxes, cfg.ground_z, cam_origin,
                                dir_world, cfg.max_range);
      if (!hit || hit->param <= 1e-6) continue;
      const std::size_t i = depth.index(u, v);
      depth.depth[i] = hit->param;
      depth.valid[i] = 1;
    }
  }
  scene.depth = smooth_depth(depth, cfg.depth_smoothing_radius);
  return scene;
}

}  // namespace pseudocal
