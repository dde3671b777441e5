#include "pseudocal/se3.hpp"

#include <algorithm>
#include <cmath>

#include "pseudocal/kernels.hpp"

namespace pseudocal {

namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kGimbalTol = 1e-7;

bool all_finite(const std::array<double, 9>& m) {
  for (double v : m)
    if (!std::isfinite(v)) return false;
  return true;
}

std::array<double, 9> matmul(const std::array<double, 9>& a,
                             const std::array<double, 9>& b) {
  std::array<double, 9> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      out[i * 3 + j] = s;
    }
  return out;
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

std::array<double, 9> inverse3(const std::array<double, 9>& m, double det) {
  std::array<double, 9> inv;
  inv[0] = (m[4] * m[8] - m[5] * m[7]) / det;
  inv[1] = (m[2] * m[7] - m[1] * m[8]) / det;
  inv[2] = (m[1] * m[5] - m[2] * m[4]) / det;
  inv[3] = (m[5] * m[6] - m[3] * m[8]) / det;
  inv[4] = (m[0] * m[8] - m[2] * m[6]) / det;
  inv[5] = (m[2] * m[3] - m[0] * m[5]) / det;
  inv[6] = (m[3] * m[7] - m[4] * m[6]) / det;
  inv[7] = (m[1] * m[6] - m[0] * m[7]) / det;
  inv[8] = (m[0] * m[4] - m[1] * m[3]) / det;
  return inv;
}

double ortho_residual(const std::array<double, 9>& m) {
  std::array<double, 9> t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i * 3 + j] = m[j * 3 + i];
  std::array<double, 9> g = matmul(t, m);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g[i * 3 + j] - target));
    }
  return worst;
}

}  // namespace

double wrap_angle(double rad) {
  double a = std::fmod(rad, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

RotationMatrix::RotationMatrix() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

RotationMatrix RotationMatrix::from_array(const std::array<double, 9>& m) {
  if (!all_finite(m))
    raise(ErrorCode::invalid_rotation, "rotation matrix has non-finite entries");
  const double residual = ortho_residual(m);
  if (residual > kOrthoTol)
    raise(ErrorCode::invalid_rotation,
          "matrix is not orthonormal (residual " + std::to_string(residual) + ")");
  const double det = det3(m);
  if (std::abs(det - 1.0) > kOrthoTol)
    raise(ErrorCode::invalid_rotation,
          "matrix determinant is " + std::to_string(det) + ", expected 1");
  return from_array_unchecked(m);
}

RotationMatrix RotationMatrix::from_array_unchecked(
    const std::array<double, 9>& m) {
  RotationMatrix r;
  r.m_ = m;
  return r;
}

RotationMatrix RotationMatrix::transpose() const {
  std::array<double, 9> t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i * 3 + j] = m_[j * 3 + i];
  return from_array_unchecked(t);
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  return from_array_unchecked(matmul(m_, other.m_));
}

double RotationMatrix::max_orthonormality_residual() const {
  return ortho_residual(m_);
}

double RotationMatrix::determinant() const { return det3(m_); }

RotationMatrix euler_to_matrix(const EulerAngles& e) {
  if (!std::isfinite(e.roll) || !std::isfinite(e.pitch) || !std::isfinite(e.yaw))
    raise(ErrorCode::invalid_angle, "euler angles must be finite");
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  // Rz(yaw) * Ry(pitch) * Rx(roll)
  return RotationMatrix::from_array_unchecked({
      cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
      sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
      -sp, cp * sr, cp * cr,
  });
}

EulerDecomposition matrix_to_euler(const RotationMatrix& r) {
  EulerDecomposition out;
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  out.angles.pitch = std::asin(sp);
  if (std::abs(std::abs(out.angles.pitch) - kPi / 2.0) < kGimbalTol) {
    out.gimbal_lock = true;
    out.angles.pitch = (sp > 0) ? kPi / 2.0 : -kPi / 2.0;
    out.angles.roll = 0.0;
    out.angles.yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    out.angles.roll = std::atan2(r(2, 1), r(2, 2));
    out.angles.yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return out;
}

EulerAngles normalize_angles(const EulerAngles& e) {
  return matrix_to_euler(euler_to_matrix(e)).angles;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  for (int i = 0; i < 3; ++i) {
    out.translation[i] = a.translation[i];
    for (int j = 0; j < 3; ++j)
      out.translation[i] += a.rotation(i, j) * b.translation[j];
  }
  return out;
}

RigidTransform inverse(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += out.rotation(i, j) * t.translation[j];
    out.translation[i] = -s;
  }
  return out;
}

PointCloud apply(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  const std::size_t n = cloud.size();
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  out.intensity = cloud.intensity;
  kernels::transform_points_f64(t.rotation.data(), t.translation.data(),
                                cloud.x.data(), cloud.y.data(), cloud.z.data(),
                                n, out.x.data(), out.y.data(), out.z.data());
  return out;
}

void apply_point(const RigidTransform& t, double px, double py, double pz,
                 double& ox, double& oy, double& oz) {
  ox = t.rotation(0, 0) * px + t.rotation(0, 1) * py + t.rotation(0, 2) * pz +
       t.translation[0];
  oy = t.rotation(1, 0) * px + t.rotation(1, 1) * py + t.rotation(1, 2) * pz +
       t.translation[1];
  oz = t.rotation(2, 0) * px + t.rotation(2, 1) * py + t.rotation(2, 2) * pz +
       t.translation[2];
}

double geodesic_angle_deg(const RotationMatrix& a, const RotationMatrix& b) {
  const RotationMatrix rel = a.transpose() * b;
  const double trace = rel(0, 0) + rel(1, 1) + rel(2, 2);
  const double arg = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return rad_to_deg(std::acos(arg));
}

RotationMatrix nearest_rotation(const std::array<double, 9>& approx) {
  if (!all_finite(approx))
    raise(ErrorCode::invalid_rotation, "matrix has non-finite entries");
  std::array<double, 9> x = approx;
  if (det3(x) <= 0.0)
    raise(ErrorCode::invalid_rotation,
          "matrix is singular or reflecting; no nearby rotation");
  for (int iter = 0; iter < 64; ++iter) {
    const double det = det3(x);
    if (std::abs(det) < 1e-12)
      raise(ErrorCode::invalid_rotation, "polar iteration became singular");
    const std::array<double, 9> inv = inverse3(x, det);
    std::array<double, 9> next;
    double delta = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        // (X + X^-T)/2
        next[i * 3 + j] = 0.5 * (x[i * 3 + j] + inv[j * 3 + i]);
        delta = std::max(delta, std::abs(next[i * 3 + j] - x[i * 3 + j]));
      }
    x = next;
    if (delta < 1e-15) break;
  }
  if (ortho_residual(x) > kOrthoTol || std::abs(det3(x) - 1.0) > kOrthoTol)
    raise(ErrorCode::invalid_rotation, "polar iteration did not converge");
  return RotationMatrix::from_array_unchecked(x);
}

const RigidTransform& camera_to_bev() {
  static const RigidTransform m = [] {
    RigidTransform t;
    t.rotation = RotationMatrix::from_array_unchecked(
        {0, 0, 1, -1, 0, 0, 0, -1, 0});
    return t;
  }();
  return m;
}

const RigidTransform& bev_to_camera() {
  static const RigidTransform m = inverse(camera_to_bev());
  return m;
}

}  // namespace pseudocal
