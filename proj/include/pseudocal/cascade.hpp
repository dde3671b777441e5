#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pseudocal/loss.hpp"
#include "pseudocal/pillars.hpp"
#include "pseudocal/samples.hpp"

namespace pseudocal {

struct CoarseGridParams {
  double yaw_step_deg = 3.0;
};

/// Two dense layers: a shared hidden layer that forks into a rotation head
/// and a translation head. Row-major weight storage.
struct RegressorWeights {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1;  // hidden_dim x input_dim
  std::vector<double> b1;  // hidden_dim
  std::vector<double> wr;  // 3 x hidden_dim
  std::vector<double> br;  // 3
  std::vector<double> wt;  // 3 x hidden_dim
  std::vector<double> bt;  // 3

  void validate() const;
};

enum class EstimatorKind {
  coarse_grid,
  toy_regressor,
  identity,
  /// Returns the exact residual from the sample's ground truth; used by the
  /// closure checks, never by real pipelines.
  oracle,
};

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::identity;
  DecalibrationRange range;
  CoarseGridParams grid;
  RegressorWeights weights;
  int downsample_factor = 1;
};

struct CascadeConfig {
  std::vector<EstimatorSpec> stages;  // 1 to 4, coarse -> fine
  PillarGridConfig grid;

  void validate() const;
};

struct StageTrace {
  double rotation_error_deg = 0.0;  // geodesic vs t_true
  double translation_error_cm = 0.0;
  CalibParams residual;            // the stage's own estimate
  RigidTransform estimate_after;   // composed estimate leaving the stage
};

struct CascadeResult {
  RigidTransform estimate;
  std::vector<StageTrace> trace;
};

/// Exhaustive search over yaw (steps of yaw_step within the stage's yaw
/// bound, full circle at 180) and integer-cell in-plane translations within
/// the translation bound, maximizing the occupancy cross-correlation of the
/// transformed pseudo grid against the LiDAR grid (normalized by full-grid
/// L2 norms). roll = pitch = 0; z translation from the mean_z difference
/// over jointly occupied cells of the best alignment. Ties break toward the
/// smallest |yaw|, then the smallest ||t||, then lexicographic (yaw, tx, ty).
CalibParams coarse_grid_estimate(const PillarImage& pseudo_img,
                                 const PillarImage& lidar_img,
                                 const DecalibrationRange& range,
                                 const CoarseGridParams& params);

/// h = relu(W1 x + b1) on the flattened concatenation (pseudo first, then
/// LiDAR) of the downsampled pillar features; rotation head output is
/// range_rad * tanh(.) per axis, translation head clamped to the stage's
/// translation bound.
CalibParams regressor_forward(const RegressorWeights& w,
                              const PillarImage& pseudo_img,
                              const PillarImage& lidar_img,
                              int downsample_factor,
                              const DecalibrationRange& range);

struct TrainHyper {
  double learning_rate = 3e-5;
  int epochs = 100;
  int batch_size = 8;
  std::uint64_t seed = 0;
  int hidden_dim = 32;
  int downsample_factor = 2;
  int pcl_subsample_cap = 512;
  LossWeights loss_weights;

  void validate() const;
};

/// Mini-batch gradient descent on the composite loss; the regression target
/// per sample is the parameter vector of inverse(t_decal), the exact
/// residual mapping t_init back to t_true. Deterministic for a fixed seed.
/// epoch_loss, when given, receives the mean training loss per epoch.
RegressorWeights train_regressor(const std::vector<CalibSample>& dataset,
                                 const DecalibrationRange& range,
                                 const TrainHyper& hyper,
                                 const PillarGridConfig& grid,
                                 std::vector<double>* epoch_loss = nullptr);

/// Re-expresses the LiDAR cloud under the current estimate, pillarizes both
/// clouds on the shared grid, runs the stage estimator, and left-composes
/// the predicted residual onto current.
RigidTransform refine_stage(const CalibSample& sample,
                            const RigidTransform& current,
                            const EstimatorSpec& est,
                            const PillarGridConfig& grid);

/// Folds refine_stage over the stages starting from the identity estimate;
/// the trace records errors against t_true after each stage.
CascadeResult run_cascade(const CalibSample& sample, const CascadeConfig& cfg);

/// Binary blob: "PCRW", u32 input_dim, u32 hidden_dim, then little-endian
/// f32 weights in order w1, b1, wr, br, wt, bt.
std::vector<std::uint8_t> serialize(const RegressorWeights& w);
RegressorWeights deserialize_regressor(std::span<const std::uint8_t> bytes);

}  // namespace pseudocal
