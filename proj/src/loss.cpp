#include "pseudocal/loss.hpp"

#include <cmath>

namespace pseudocal {

RigidTransform params_to_transform(const CalibParams& p) {
  RigidTransform t;
  t.rotation = euler_to_matrix(p.euler);
  t.translation = p.translation;
  return t;
}

CalibParams transform_to_params(const RigidTransform& t) {
  CalibParams p;
  p.euler = matrix_to_euler(t.rotation).angles;
  p.translation = t.translation;
  return p;
}

void LossWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0 || delta < 0)
    raise(ErrorCode::config_error, "loss weights must be >= 0");
}

double translation_loss(const CalibParams& pred, const CalibParams& gt) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = pred.translation[i] - gt.translation[i];
    s += d * d;
  }
  return s / 3.0;
}

namespace {

std::array<double, 3> wrapped_angle_diffs(const CalibParams& pred,
                                          const CalibParams& gt) {
  return {wrap_angle(pred.euler.roll - gt.euler.roll),
          wrap_angle(pred.euler.pitch - gt.euler.pitch),
          wrap_angle(pred.euler.yaw - gt.euler.yaw)};
}

}  // namespace

double rotation_loss(const CalibParams& pred, const CalibParams& gt) {
  const auto d = wrapped_angle_diffs(pred, gt);
  return (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / 3.0;
}

PointCloud subsample_every_kth(const PointCloud& cloud, int cap) {
  if (cap < 1) raise(ErrorCode::config_error, "subsample cap must be >= 1");
  const std::size_t n = cloud.size();
  if (n <= static_cast<std::size_t>(cap)) return cloud;
  const std::size_t k = (n + cap - 1) / cap;
  PointCloud out;
  out.reserve(n / k + 1);
  for (std::size_t i = 0; i < n; i += k) {
    if (cloud.has_intensity())
      out.add(cloud.x[i], cloud.y[i], cloud.z[i], cloud.intensity[i]);
    else
      out.add(cloud.x[i], cloud.y[i], cloud.z[i]);
  }
  return out;
}

std::array<std::array<double, 9>, 3> rotation_jacobians(const EulerAngles& e) {
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);

  // R = Rz(yaw) Ry(pitch) Rx(roll); differentiate factor by factor.
  std::array<double, 9> d_roll = {
      0, cy * sp * cr + sy * sr, -cy * sp * sr + sy * cr,
      0, sy * sp * cr - cy * sr, -sy * sp * sr - cy * cr,
      0, cp * cr, -cp * sr,
  };
  std::array<double, 9> d_pitch = {
      -cy * sp, cy * cp * sr, cy * cp * cr,
      -sy * sp, sy * cp * sr, sy * cp * cr,
      -cp, -sp * sr, -sp * cr,
  };
  std::array<double, 9> d_yaw = {
      -sy * cp, -sy * sp * sr - cy * cr, -sy * sp * cr + cy * sr,
      cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
      0, 0, 0,
  };
  return {d_roll, d_pitch, d_yaw};
}

namespace {

struct SpatialTerm {
  double value = 0.0;
  std::array<double, 6> grad{};
};

// Shared evaluation for the pcl term (per-point mean) and the centroid term
// (single averaged point): mean_i ||R_p p_i + t_p - (R_g p_i + t_g)||, with
// the analytic gradient with respect to pred's 6 parameters. Points with a
// zero difference contribute a zero (sub)gradient.
SpatialTerm mean_distance_term(const std::vector<std::array<double, 3>>& pts,
                               const CalibParams& pred, const CalibParams& gt) {
  const RigidTransform tp = params_to_transform(pred);
  const RigidTransform tg = params_to_transform(gt);
  const auto jac = rotation_jacobians(pred.euler);

  SpatialTerm out;
  const double inv_n = 1.0 / static_cast<double>(pts.size());
  for (const auto& p : pts) {
    double ax, ay, az, bx, by, bz;
    apply_point(tp, p[0], p[1], p[2], ax, ay, az);
    apply_point(tg, p[0], p[1], p[2], bx, by, bz);
    const double dx = ax - bx, dy = ay - by, dz = az - bz;
    const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
    out.value += inv_n * norm;
    if (norm < 1e-300) continue;
    const double ux = dx / norm, uy = dy / norm, uz = dz / norm;
    for (int k = 0; k < 3; ++k) {
      const auto& j = jac[k];
      const double jx = j[0] * p[0] + j[1] * p[1] + j[2] * p[2];
      const double jy = j[3] * p[0] + j[4] * p[1] + j[5] * p[2];
      const double jz = j[6] * p[0] + j[7] * p[1] + j[8] * p[2];
      out.grad[k] += inv_n * (ux * jx + uy * jy + uz * jz);
    }
    out.grad[3] += inv_n * ux;
    out.grad[4] += inv_n * uy;
    out.grad[5] += inv_n * uz;
  }
  return out;
}

std::vector<std::array<double, 3>> subsampled_points(const PointCloud& cloud,
                                                     int cap) {
  if (cloud.empty()) raise(ErrorCode::empty_cloud, "empty point cloud");
  const PointCloud sub = subsample_every_kth(cloud, cap);
  std::vector<std::array<double, 3>> pts(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i)
    pts[i] = {sub.x[i], sub.y[i], sub.z[i]};
  return pts;
}

std::array<double, 3> centroid_of(const std::vector<std::array<double, 3>>& pts) {
  std::array<double, 3> c{};
  for (const auto& p : pts) {
    c[0] += p[0];
    c[1] += p[1];
    c[2] += p[2];
  }
  const double inv = 1.0 / static_cast<double>(pts.size());
  return {c[0] * inv, c[1] * inv, c[2] * inv};
}

}  // namespace

double pcl_loss(const PointCloud& cloud, const CalibParams& pred,
                const CalibParams& gt, int subsample_cap) {
  return mean_distance_term(subsampled_points(cloud, subsample_cap), pred, gt)
      .value;
}

double centroid_loss(const PointCloud& cloud, const CalibParams& pred,
                     const CalibParams& gt, int subsample_cap) {
  const auto pts = subsampled_points(cloud, subsample_cap);
  return mean_distance_term({centroid_of(pts)}, pred, gt).value;
}

LossBreakdown total_loss(const PointCloud& cloud, const CalibParams& pred,
                         const CalibParams& gt, const LossWeights& w,
                         int subsample_cap) {
  w.validate();
  const auto pts = subsampled_points(cloud, subsample_cap);

  LossBreakdown out;
  out.l_t = translation_loss(pred, gt);
  out.l_r = rotation_loss(pred, gt);
  const SpatialTerm pcl = mean_distance_term(pts, pred, gt);
  const SpatialTerm cen = mean_distance_term({centroid_of(pts)}, pred, gt);
  out.l_pcl = pcl.value;
  out.l_c = cen.value;
  out.total = w.alpha * out.l_t + w.beta * out.l_r + w.gamma * out.l_pcl +
              w.delta * out.l_c;

  const auto ad = wrapped_angle_diffs(pred, gt);
  for (int k = 0; k < 3; ++k) {
    out.grad[k] = w.beta * (2.0 / 3.0) * ad[k] + w.gamma * pcl.grad[k] +
                  w.delta * cen.grad[k];
    out.grad[3 + k] = w.alpha * (2.0 / 3.0) *
                          (pred.translation[k] - gt.translation[k]) +
                      w.gamma * pcl.grad[3 + k] + w.delta * cen.grad[3 + k];
  }
  return out;
}

}  // namespace pseudocal
