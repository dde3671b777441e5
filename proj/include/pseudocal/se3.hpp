#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pseudocal/errors.hpp"

namespace pseudocal {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

/// Intrinsic Z·Y·X angles: yaw about Z applied first when composing the
/// matrix as Rz(yaw)·Ry(pitch)·Rx(roll) acting on column vectors.
/// Radians. Canonical range after normalization: roll, yaw in (-pi, pi],
/// pitch in [-pi/2, pi/2].
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// 3x3 proper rotation, row-major. Construction through from_array checks
/// orthonormality (||R^T R - I||_inf <= 1e-9) and det(R) = 1 +- 1e-9.
class RotationMatrix {
 public:
  RotationMatrix();  // identity

  static RotationMatrix from_array(const std::array<double, 9>& m);
  // Skips the invariant check; for internal use where the product of
  // rotations is constructed.
  static RotationMatrix from_array_unchecked(const std::array<double, 9>& m);

  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  const double* data() const { return m_.data(); }
  const std::array<double, 9>& array() const { return m_; }

  RotationMatrix transpose() const;
  RotationMatrix operator*(const RotationMatrix& other) const;

  double max_orthonormality_residual() const;
  double determinant() const;

 private:
  std::array<double, 9> m_;
};

struct RigidTransform {
  RotationMatrix rotation;
  std::array<double, 3> translation{0.0, 0.0, 0.0};

  static RigidTransform identity() { return RigidTransform{}; }
};

/// Ordered points stored column-wise (x/y/z arrays) so the transform
/// kernels can run vectorized. Intensity is optional; when present it has
/// one entry per point in [0, 1].
struct PointCloud {
  std::vector<double> x, y, z;
  std::vector<float> intensity;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  bool has_intensity() const { return !intensity.empty(); }

  void reserve(std::size_t n) {
    x.reserve(n);
    y.reserve(n);
    z.reserve(n);
  }
  void add(double px, double py, double pz) {
    x.push_back(px);
    y.push_back(py);
    z.push_back(pz);
  }
  void add(double px, double py, double pz, float inten) {
    add(px, py, pz);
    intensity.push_back(inten);
  }
};

struct EulerDecomposition {
  EulerAngles angles;
  // Set when |pitch| is within 1e-7 of pi/2; roll is then fixed to 0 and
  // yaw absorbs the free direction.
  bool gimbal_lock = false;
};

RotationMatrix euler_to_matrix(const EulerAngles& e);
EulerDecomposition matrix_to_euler(const RotationMatrix& r);

// Canonicalizes by a matrix round trip; exact angles away from gimbal lock.
EulerAngles normalize_angles(const EulerAngles& e);

// compose(a, b) applies b first: apply(compose(a,b), p) == apply(a, apply(b, p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);

PointCloud apply(const RigidTransform& t, const PointCloud& cloud);
void apply_point(const RigidTransform& t, double px, double py, double pz,
                 double& ox, double& oy, double& oz);

// arccos((trace(a^T b) - 1) / 2) in degrees, trace argument clamped to [-1, 1].
double geodesic_angle_deg(const RotationMatrix& a, const RotationMatrix& b);

// Nearest proper rotation to an arbitrary 3x3 matrix (polar decomposition by
// Newton iteration X <- (X + X^-T)/2). Raises invalid_rotation when the
// input is singular or reflects.
RotationMatrix nearest_rotation(const std::array<double, 9>& approx);

/// Fixed re-axing from the optical camera frame (x right, y down, z forward)
/// to the bird's-eye frame used by the pillar grids and the pipeline
/// extrinsic (x forward = cam z, y left = -cam x, z up = -cam y).
const RigidTransform& camera_to_bev();
const RigidTransform& bev_to_camera();

}  // namespace pseudocal
