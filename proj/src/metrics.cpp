#include "pseudocal/metrics.hpp"

#include <cmath>

namespace pseudocal {

MaeReport mae_metrics(const std::vector<CalibParams>& preds,
                      const std::vector<CalibParams>& gts) {
  if (preds.empty())
    raise(ErrorCode::input_error, "mae_metrics needs at least one pair");
  if (preds.size() != gts.size())
    raise(ErrorCode::input_error,
          "mae_metrics length mismatch: " + std::to_string(preds.size()) +
              " predictions vs " + std::to_string(gts.size()) + " labels");

  MaeReport out;
  out.n_samples = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const CalibParams& p = preds[i];
    const CalibParams& g = gts[i];
    out.rotation_axis_mae_deg[0] +=
        std::abs(rad_to_deg(wrap_angle(p.euler.roll - g.euler.roll)));
    out.rotation_axis_mae_deg[1] +=
        std::abs(rad_to_deg(wrap_angle(p.euler.pitch - g.euler.pitch)));
    out.rotation_axis_mae_deg[2] +=
        std::abs(rad_to_deg(wrap_angle(p.euler.yaw - g.euler.yaw)));
    for (int k = 0; k < 3; ++k)
      out.translation_axis_mae_cm[k] +=
          std::abs(p.translation[k] - g.translation[k]) * 100.0;
    out.geodesic_mae_deg += geodesic_angle_deg(euler_to_matrix(p.euler),
                                               euler_to_matrix(g.euler));
  }
  const double inv_n = 1.0 / static_cast<double>(preds.size());
  for (int k = 0; k < 3; ++k) {
    out.rotation_axis_mae_deg[k] *= inv_n;
    out.translation_axis_mae_cm[k] *= inv_n;
    out.rotation_mae_deg += out.rotation_axis_mae_deg[k] / 3.0;
    out.translation_mae_cm += out.translation_axis_mae_cm[k] / 3.0;
  }
  out.geodesic_mae_deg *= inv_n;
  return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace pseudocal
