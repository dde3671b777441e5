#pragma once

#include <array>

#include "pseudocal/se3.hpp"

namespace pseudocal {

/// The 6 regressed calibration parameters: Euler angles (radians) plus
/// translation (meters).
struct CalibParams {
  EulerAngles euler;
  std::array<double, 3> translation{0.0, 0.0, 0.0};
};

RigidTransform params_to_transform(const CalibParams& p);
CalibParams transform_to_params(const RigidTransform& t);

struct LossWeights {
  double alpha = 1.3;   // translation MSE
  double beta = 1.3;    // rotation MSE
  double gamma = 1.0;   // point-cloud distance
  double delta = 1.75;  // centroid distance

  void validate() const;
};

/// total = alpha*l_t + beta*l_r + gamma*l_pcl + delta*l_c.
/// grad is d(total)/d(pred) in the order [roll, pitch, yaw, tx, ty, tz],
/// holding gt and the cloud fixed.
struct LossBreakdown {
  double l_t = 0.0;
  double l_r = 0.0;
  double l_pcl = 0.0;
  double l_c = 0.0;
  double total = 0.0;
  std::array<double, 6> grad{};
};

/// Mean over the 3 axes of the squared translation difference (m^2).
double translation_loss(const CalibParams& pred, const CalibParams& gt);

/// Mean over the 3 axes of the squared angle difference, each wrapped into
/// (-pi, pi] before squaring (rad^2).
double rotation_loss(const CalibParams& pred, const CalibParams& gt);

/// Mean over points of ||T_pred p_i - T_gt p_i|| (meters), correspondence by
/// index. The cloud is deterministically subsampled to at most
/// subsample_cap points (every k-th point).
double pcl_loss(const PointCloud& cloud, const CalibParams& pred,
                const CalibParams& gt, int subsample_cap = 4096);

/// ||mean(T_pred P) - mean(T_gt P)|| (meters) over the same subsample.
double centroid_loss(const PointCloud& cloud, const CalibParams& pred,
                     const CalibParams& gt, int subsample_cap = 4096);

LossBreakdown total_loss(const PointCloud& cloud, const CalibParams& pred,
                         const CalibParams& gt, const LossWeights& w,
                         int subsample_cap = 4096);

/// Every k-th point with k = ceil(n / cap); identity when n <= cap.
PointCloud subsample_every_kth(const PointCloud& cloud, int cap);

/// d(R)/d(roll), d(R)/d(pitch), d(R)/d(yaw) for R = Rz(yaw)Ry(pitch)Rx(roll);
/// shared with the regressor backprop.
std::array<std::array<double, 9>, 3> rotation_jacobians(const EulerAngles& e);

}  // namespace pseudocal
