#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pseudocal/loss.hpp"

namespace pseudocal {

/// Mean absolute errors between predicted and ground-truth parameters.
/// Rotation: per-axis mean of |wrapped difference| in degrees, aggregated as
/// the mean over the three axes (geodesic mean is reported alongside).
/// Translation: per-axis MAE in centimeters, aggregated the same way.
struct MaeReport {
  double rotation_mae_deg = 0.0;
  double translation_mae_cm = 0.0;
  std::array<double, 3> rotation_axis_mae_deg{};   // roll, pitch, yaw
  std::array<double, 3> translation_axis_mae_cm{};  // x, y, z
  double geodesic_mae_deg = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t config_fingerprint = 0;
};

MaeReport mae_metrics(const std::vector<CalibParams>& preds,
                      const std::vector<CalibParams>& gts);

/// FNV-1a 64 over arbitrary text; used for config fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace pseudocal
