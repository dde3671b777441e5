#include "pseudocal/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "pseudocal/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace pseudocal {

void RegressorWeights::validate() const {
  if (input_dim < 1 || hidden_dim < 1)
    raise(ErrorCode::config_error, "regressor dimensions must be >= 1");
  const auto expect = [&](const std::vector<double>& v, std::size_t n,
                          const char* name) {
    if (v.size() != n)
      raise(ErrorCode::dimension_mismatch,
            std::string("regressor tensor ") + name + " has wrong size");
    for (double e : v)
      if (!std::isfinite(e))
        raise(ErrorCode::config_error,
              std::string("regressor tensor ") + name + " has non-finite entries");
  };
  expect(w1, static_cast<std::size_t>(hidden_dim) * input_dim, "w1");
  expect(b1, hidden_dim, "b1");
  expect(wr, static_cast<std::size_t>(3) * hidden_dim, "wr");
  expect(br, 3, "br");
  expect(wt, static_cast<std::size_t>(3) * hidden_dim, "wt");
  expect(bt, 3, "bt");
}

void CascadeConfig::validate() const {
  if (stages.empty() || stages.size() > 4)
    raise(ErrorCode::config_error, "cascade needs 1 to 4 stages");
  grid.validate();
  for (std::size_t k = 1; k < stages.size(); ++k) {
    const DecalibrationRange& prev = stages[k - 1].range;
    const DecalibrationRange& cur = stages[k].range;
    if (cur.roll_max_deg > prev.roll_max_deg ||
        cur.pitch_max_deg > prev.pitch_max_deg ||
        cur.yaw_max_deg > prev.yaw_max_deg ||
        cur.trans_max_cm > prev.trans_max_cm)
      raise(ErrorCode::config_error,
            "stage ranges must be non-increasing per axis (coarse to fine)");
  }
}

void TrainHyper::validate() const {
  if (!(learning_rate > 0.0))
    raise(ErrorCode::config_error, "learning_rate must be > 0");
  if (epochs < 1 || batch_size < 1)
    raise(ErrorCode::config_error, "epochs and batch_size must be >= 1");
  if (hidden_dim < 1) raise(ErrorCode::config_error, "hidden_dim must be >= 1");
  if (downsample_factor < 1)
    raise(ErrorCode::config_error, "downsample_factor must be >= 1");
  if (pcl_subsample_cap < 1)
    raise(ErrorCode::config_error, "pcl_subsample_cap must be >= 1");
  loss_weights.validate();
}

namespace {

bool same_grid(const PillarGridConfig& a, const PillarGridConfig& b) {
  return a.x_min == b.x_min && a.x_max == b.x_max && a.y_min == b.y_min &&
         a.y_max == b.y_max && a.cell_size == b.cell_size &&
         a.z_clip_min == b.z_clip_min && a.z_clip_max == b.z_clip_max &&
         a.max_points_per_pillar == b.max_points_per_pillar;
}

std::vector<float> channel(const PillarImage& img, int ch) {
  std::vector<float> grid(img.cell_count());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = img.features[i * PillarImage::kFeatureCount + ch];
  return grid;
}

}  // namespace

CalibParams coarse_grid_estimate(const PillarImage& pseudo_img,
                                 const PillarImage& lidar_img,
                                 const DecalibrationRange& range,
                                 const CoarseGridParams& params) {
  range.validate();
  if (!(params.yaw_step_deg > 0.0))
    raise(ErrorCode::config_error, "yaw_step must be > 0");
  if (pseudo_img.rows != lidar_img.rows || pseudo_img.cols != lidar_img.cols ||
      !same_grid(pseudo_img.config, lidar_img.config))
    raise(ErrorCode::dimension_mismatch,
          "pseudo and LiDAR pillar images use different grids");

  const int rows = lidar_img.rows, cols = lidar_img.cols;
  const PillarGridConfig& g = lidar_img.config;
  const std::vector<float> pseudo_occ = occupancy(pseudo_img);
  const std::vector<float> lidar_occ = occupancy(lidar_img);
  const double norm_p =
      std::sqrt(kernels::sumsq_f32(pseudo_occ.data(), pseudo_occ.size()));
  const double norm_l =
      std::sqrt(kernels::sumsq_f32(lidar_occ.data(), lidar_occ.size()));
  if (norm_p == 0.0 || norm_l == 0.0)
    raise(ErrorCode::no_overlap, "occupancy grid is all-zero");

  const int n_shift =
      static_cast<int>(std::floor(range.trans_max_cm / 100.0 / g.cell_size + 1e-9));
  const int pad = 2 * n_shift;
  const int pw = cols + 2 * pad, ph = rows + 2 * pad;
  // Guard region in front of the padded grid absorbs sentinel + shift
  // lookups from source cells that can never reach the real grid.
  const std::size_t guard = 2 * (static_cast<std::size_t>(n_shift) * pw + n_shift) + 16;
  const std::int32_t sentinel = static_cast<std::int32_t>(guard / 2);

  const std::vector<float> pseudo_meanz = channel(pseudo_img, 3);
  std::vector<float> occ_pad(guard + static_cast<std::size_t>(pw) * ph, 0.0f);
  std::vector<float> meanz_pad(occ_pad.size(), 0.0f);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const std::size_t src = static_cast<std::size_t>(r) * cols + c;
      const std::size_t dst =
          guard + static_cast<std::size_t>(r + pad) * pw + (c + pad);
      occ_pad[dst] = pseudo_occ[src];
      meanz_pad[dst] = pseudo_meanz[src];
    }

  // Only occupied LiDAR cells contribute to the correlation.
  struct OccCell {
    double cx, cy;
    std::size_t flat;
  };
  std::vector<OccCell> cells;
  std::vector<float> weights;
  const std::vector<float> lidar_meanz = channel(lidar_img, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (lidar_occ[i] <= 0.0f) continue;
      cells.push_back(OccCell{g.x_min + (c + 0.5) * g.cell_size,
                              g.y_min + (r + 0.5) * g.cell_size, i});
      weights.push_back(lidar_occ[i]);
    }

  struct Best {
    float score = -std::numeric_limits<float>::infinity();
    double yaw = 0.0;
    int di = 0, dj = 0;
    std::vector<std::int32_t> idx;
  } best;

  const double yaw_max = range.yaw_max_deg;
  std::vector<double> yaw_candidates;
  for (double y = -yaw_max;; y += params.yaw_step_deg) {
    if (y > yaw_max + 1e-9) break;
    if (yaw_max >= 180.0 - 1e-9 && y >= 180.0 - 1e-9) break;  // -180 == +180
    yaw_candidates.push_back(y);
    if (yaw_max == 0.0) break;
  }

  std::vector<std::int32_t> idx(cells.size());
  for (const double yaw_deg : yaw_candidates) {
    const double yaw = deg_to_rad(yaw_deg);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double sx = cy * cells[i].cx - sy * cells[i].cy;
      const double sy_ = sy * cells[i].cx + cy * cells[i].cy;
      const int scol = static_cast<int>(std::floor((sx - g.x_min) / g.cell_size));
      const int srow = static_cast<int>(std::floor((sy_ - g.y_min) / g.cell_size));
      if (scol < -n_shift || scol >= cols + n_shift || srow < -n_shift ||
          srow >= rows + n_shift) {
        idx[i] = sentinel;
      } else {
        idx[i] = static_cast<std::int32_t>(
            guard + static_cast<std::size_t>(srow + pad) * pw + (scol + pad));
      }
    }
    for (int dj = -n_shift; dj <= n_shift; ++dj) {
      for (int di = -n_shift; di <= n_shift; ++di) {
        const std::int32_t offset = dj * pw + di;
        const float score = kernels::gather_dot_f32(
            occ_pad.data(), idx.data(), offset, weights.data(), cells.size());
        bool take = false;
        if (score > best.score) {
          take = true;
        } else if (score == best.score) {
          const double ay = std::abs(wrap_angle(deg_to_rad(yaw_deg)));
          const double by = std::abs(wrap_angle(deg_to_rad(best.yaw)));
          const double at = static_cast<double>(di) * di + static_cast<double>(dj) * dj;
          const double bt = static_cast<double>(best.di) * best.di +
                            static_cast<double>(best.dj) * best.dj;
          if (ay < by - 1e-12) take = true;
          else if (std::abs(ay - by) <= 1e-12 && at < bt) take = true;
          else if (std::abs(ay - by) <= 1e-12 && at == bt) {
            const auto cand = std::array<double, 3>{yaw_deg, double(di), double(dj)};
            const auto cur = std::array<double, 3>{best.yaw, double(best.di),
                                                   double(best.dj)};
            take = cand < cur;
          }
        }
        if (take) {
          best.score = score;
          best.yaw = yaw_deg;
          best.di = di;
          best.dj = dj;
          best.idx = idx;
        }
      }
    }
  }

  // z offset from the mean-z difference over jointly occupied cells of the
  // winning alignment.
  double dz_sum = 0.0;
  std::size_t dz_count = 0;
  const std::int32_t best_off = best.dj * pw + best.di;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::int32_t j = best.idx[i] + best_off;
    if (occ_pad[j] <= 0.0f) continue;
    dz_sum += static_cast<double>(meanz_pad[j]) - lidar_meanz[cells[i].flat];
    ++dz_count;
  }
  const double trans_max = range.trans_max_cm / 100.0;
  double tz = dz_count > 0 ? dz_sum / static_cast<double>(dz_count) : 0.0;
  tz = std::clamp(tz, -trans_max, trans_max);

  CalibParams out;
  out.euler.yaw = wrap_angle(deg_to_rad(best.yaw));
  out.translation = {best.di * g.cell_size, best.dj * g.cell_size, tz};
  return out;
}

namespace {

std::vector<double> flatten_inputs(const PillarImage& pseudo_img,
                                   const PillarImage& lidar_img,
                                   int downsample_factor) {
  const PillarImage p = downsample(pseudo_img, downsample_factor);
  const PillarImage l = downsample(lidar_img, downsample_factor);
  if (p.rows != l.rows || p.cols != l.cols)
    raise(ErrorCode::dimension_mismatch,
          "pseudo and LiDAR pillar images differ in size");
  std::vector<double> x;
  x.reserve(p.features.size() + l.features.size());
  for (float v : p.features) x.push_back(v);
  for (float v : l.features) x.push_back(v);
  return x;
}

struct ForwardState {
  std::vector<double> x, z1, h;
  std::array<double, 3> zr{}, zt{};
  CalibParams pred;
};

std::array<double, 3> rotation_scales(const DecalibrationRange& range) {
  return {deg_to_rad(range.roll_max_deg), deg_to_rad(range.pitch_max_deg),
          deg_to_rad(range.yaw_max_deg)};
}

ForwardState forward_pass(const RegressorWeights& w, std::vector<double> x,
                          const DecalibrationRange& range) {
  if (static_cast<int>(x.size()) != w.input_dim)
    raise(ErrorCode::dimension_mismatch,
          "regressor input size " + std::to_string(x.size()) +
              " does not match weights (" + std::to_string(w.input_dim) + ")");
  ForwardState s;
  s.x = std::move(x);
  s.z1.resize(w.hidden_dim);
  s.h.resize(w.hidden_dim);
  for (int i = 0; i < w.hidden_dim; ++i) {
    s.z1[i] = kernels::dot_f64(w.w1.data() +
                                   static_cast<std::size_t>(i) * w.input_dim,
                               s.x.data(), s.x.size()) +
              w.b1[i];
    s.h[i] = s.z1[i] > 0.0 ? s.z1[i] : 0.0;
  }
  const auto scales = rotation_scales(range);
  const double trans_max = range.trans_max_cm / 100.0;
  double* rot = &s.pred.euler.roll;
  for (int i = 0; i < 3; ++i) {
    s.zr[i] = kernels::dot_f64(
                  w.wr.data() + static_cast<std::size_t>(i) * w.hidden_dim,
                  s.h.data(), s.h.size()) +
              w.br[i];
    rot[i] = scales[i] * std::tanh(s.zr[i]);
    s.zt[i] = kernels::dot_f64(
                  w.wt.data() + static_cast<std::size_t>(i) * w.hidden_dim,
                  s.h.data(), s.h.size()) +
              w.bt[i];
    s.pred.translation[i] = std::clamp(s.zt[i], -trans_max, trans_max);
  }
  return s;
}

}  // namespace

CalibParams regressor_forward(const RegressorWeights& w,
                              const PillarImage& pseudo_img,
                              const PillarImage& lidar_img,
                              int downsample_factor,
                              const DecalibrationRange& range) {
  w.validate();
  range.validate();
  return forward_pass(w, flatten_inputs(pseudo_img, lidar_img, downsample_factor),
                      range)
      .pred;
}

RegressorWeights train_regressor(const std::vector<CalibSample>& dataset,
                                 const DecalibrationRange& range,
                                 const TrainHyper& hyper,
                                 const PillarGridConfig& grid,
                                 std::vector<double>* epoch_loss) {
  hyper.validate();
  range.validate();
  if (dataset.empty())
    raise(ErrorCode::empty_dataset, "training dataset is empty");

  struct Example {
    std::vector<double> x;
    CalibParams target;
    PointCloud cloud;
  };
  std::vector<Example> examples;
  examples.reserve(dataset.size());
  for (const CalibSample& s : dataset) {
    Example ex;
    const PillarImage lidar_img = pillarize(apply(s.t_init, s.lidar_cloud), grid);
    const PillarImage pseudo_img = pillarize(s.pseudo_cloud, grid);
    ex.x = flatten_inputs(pseudo_img, lidar_img, hyper.downsample_factor);
    ex.target = transform_to_params(inverse(s.t_decal));
    ex.cloud = subsample_every_kth(s.lidar_cloud, hyper.pcl_subsample_cap);
    examples.push_back(std::move(ex));
  }

  const int input_dim = static_cast<int>(examples.front().x.size());
  const int hidden = hyper.hidden_dim;
  RegressorWeights w;
  w.input_dim = input_dim;
  w.hidden_dim = hidden;
  Rng rng(hyper.seed);
  const double w1_scale = std::sqrt(2.0 / input_dim);
  const double head_scale = std::sqrt(1.0 / hidden);
  w.w1.resize(static_cast<std::size_t>(hidden) * input_dim);
  for (auto& v : w.w1) v = rng.normal() * w1_scale;
  w.b1.assign(hidden, 0.0);
  w.wr.resize(static_cast<std::size_t>(3) * hidden);
  for (auto& v : w.wr) v = rng.normal() * head_scale;
  w.br.assign(3, 0.0);
  w.wt.resize(static_cast<std::size_t>(3) * hidden);
  for (auto& v : w.wt) v = rng.normal() * head_scale;
  w.bt.assign(3, 0.0);

  const auto scales = rotation_scales(range);
  const double trans_max = range.trans_max_cm / 100.0;

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> gw1(w.w1.size()), gb1(hidden), gwr(w.wr.size()), gbr(3),
      gwt(w.wt.size()), gbt(3), dh(hidden), dz1(hidden);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates on the deterministic stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    double loss_acc = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += hyper.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gwr.begin(), gwr.end(), 0.0);
      std::fill(gbr.begin(), gbr.end(), 0.0);
      std::fill(gwt.begin(), gwt.end(), 0.0);
      std::fill(gbt.begin(), gbt.end(), 0.0);

      for (std::size_t bi = start; bi < end; ++bi) {
        const Example& ex = examples[order[bi]];
        ForwardState st = forward_pass(w, ex.x, range);
        const LossBreakdown loss =
            total_loss(ex.cloud, st.pred, ex.target, hyper.loss_weights,
                       hyper.pcl_subsample_cap);
        loss_acc += loss.total;

        std::array<double, 3> dzr{}, dzt{};
        for (int i = 0; i < 3; ++i) {
          const double th = std::tanh(st.zr[i]);
          dzr[i] = loss.grad[i] * scales[i] * (1.0 - th * th);
          const bool inside = std::abs(st.zt[i]) < trans_max;
          dzt[i] = inside ? loss.grad[3 + i] : 0.0;
        }
        for (int j = 0; j < hidden; ++j) {
          double acc = 0.0;
          for (int i = 0; i < 3; ++i) {
            acc += w.wr[static_cast<std::size_t>(i) * hidden + j] * dzr[i];
            acc += w.wt[static_cast<std::size_t>(i) * hidden + j] * dzt[i];
          }
          dh[j] = acc;
          dz1[j] = st.z1[j] > 0.0 ? acc : 0.0;
        }
        for (int i = 0; i < 3; ++i) {
          kernels::axpy_f64(dzr[i], st.h.data(),
                            gwr.data() + static_cast<std::size_t>(i) * hidden,
                            hidden);
          kernels::axpy_f64(dzt[i], st.h.data(),
                            gwt.data() + static_cast<std::size_t>(i) * hidden,
                            hidden);
          gbr[i] += dzr[i];
          gbt[i] += dzt[i];
        }
        for (int j = 0; j < hidden; ++j) {
          if (dz1[j] != 0.0)
            kernels::axpy_f64(dz1[j], ex.x.data(),
                              gw1.data() + static_cast<std::size_t>(j) * input_dim,
                              input_dim);
          gb1[j] += dz1[j];
        }
      }

      const double step = -hyper.learning_rate / static_cast<double>(end - start);
      kernels::axpy_f64(step, gw1.data(), w.w1.data(), w.w1.size());
      kernels::axpy_f64(step, gb1.data(), w.b1.data(), w.b1.size());
      kernels::axpy_f64(step, gwr.data(), w.wr.data(), w.wr.size());
      kernels::axpy_f64(step, gbr.data(), w.br.data(), w.br.size());
      kernels::axpy_f64(step, gwt.data(), w.wt.data(), w.wt.size());
      kernels::axpy_f64(step, gbt.data(), w.bt.data(), w.bt.size());
    }
    if (epoch_loss)
      epoch_loss->push_back(loss_acc / static_cast<double>(examples.size()));
  }
  return w;
}

namespace {

CalibParams estimate_residual(const CalibSample& sample,
                              const RigidTransform& current,
                              const EstimatorSpec& est,
                              const PillarGridConfig& grid) {
  switch (est.kind) {
    case EstimatorKind::identity:
      return CalibParams{};
    case EstimatorKind::oracle:
      return transform_to_params(compose(sample.t_true, inverse(current)));
    case EstimatorKind::coarse_grid: {
      const PillarImage lidar_img =
          pillarize(apply(current, sample.lidar_cloud), grid);
      const PillarImage pseudo_img = pillarize(sample.pseudo_cloud, grid);
      return coarse_grid_estimate(pseudo_img, lidar_img, est.range, est.grid);
    }
    case EstimatorKind::toy_regressor: {
      const PillarImage lidar_img =
          pillarize(apply(current, sample.lidar_cloud), grid);
      const PillarImage pseudo_img = pillarize(sample.pseudo_cloud, grid);
      return regressor_forward(est.weights, pseudo_img, lidar_img,
                               est.downsample_factor, est.range);
    }
  }
  raise(ErrorCode::config_error, "unknown estimator kind");
}

}  // namespace

RigidTransform refine_stage(const CalibSample& sample,
                            const RigidTransform& current,
                            const EstimatorSpec& est,
                            const PillarGridConfig& grid) {
  return compose(params_to_transform(estimate_residual(sample, current, est, grid)),
                 current);
}

CascadeResult run_cascade(const CalibSample& sample, const CascadeConfig& cfg) {
  cfg.validate();
  CascadeResult out;
  RigidTransform current = RigidTransform::identity();
  for (const EstimatorSpec& est : cfg.stages) {
    const CalibParams residual = estimate_residual(sample, current, est, cfg.grid);
    current = compose(params_to_transform(residual), current);
    StageTrace trace;
    trace.residual = residual;
    trace.rotation_error_deg =
        geodesic_angle_deg(current.rotation, sample.t_true.rotation);
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = current.translation[i] - sample.t_true.translation[i];
      d2 += d * d;
    }
    trace.translation_error_cm = std::sqrt(d2) * 100.0;
    out.trace.push_back(trace);
  }
  out.estimate = current;
  return out;
}

namespace {

constexpr char kRegressorMagic[4] = {'P', 'C', 'R', 'W'};

template <typename T>
void append_raw(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void append_f32(std::vector<std::uint8_t>& out, const std::vector<double>& v) {
  for (double d : v) append_raw(out, static_cast<float>(d));
}

template <typename T>
T read_raw(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size())
    raise(ErrorCode::format_error, "truncated regressor blob");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::vector<double> read_f32(std::span<const std::uint8_t> bytes,
                             std::size_t& pos, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = read_raw<float>(bytes, pos);
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize(const RegressorWeights& w) {
  w.validate();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kRegressorMagic, kRegressorMagic + 4);
  append_raw(out, static_cast<std::uint32_t>(w.input_dim));
  append_raw(out, static_cast<std::uint32_t>(w.hidden_dim));
  append_f32(out, w.w1);
  append_f32(out, w.b1);
  append_f32(out, w.wr);
  append_f32(out, w.br);
  append_f32(out, w.wt);
  append_f32(out, w.bt);
  return out;
}

RegressorWeights deserialize_regressor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kRegressorMagic, 4) != 0)
    raise(ErrorCode::format_error, "missing PCRW magic");
  std::size_t pos = 4;
  RegressorWeights w;
  w.input_dim = static_cast<int>(read_raw<std::uint32_t>(bytes, pos));
  w.hidden_dim = static_cast<int>(read_raw<std::uint32_t>(bytes, pos));
  if (w.input_dim < 1 || w.hidden_dim < 1)
    raise(ErrorCode::format_error, "invalid regressor dimensions");
  const std::size_t in = w.input_dim, hid = w.hidden_dim;
  w.w1 = read_f32(bytes, pos, hid * in);
  w.b1 = read_f32(bytes, pos, hid);
  w.wr = read_f32(bytes, pos, 3 * hid);
  w.br = read_f32(bytes, pos, 3);
  w.wt = read_f32(bytes, pos, 3 * hid);
  w.bt = read_f32(bytes, pos, 3);
  if (pos != bytes.size())
    raise(ErrorCode::format_error, "trailing bytes in regressor blob");
  w.validate();
  return w;
}

}  // namespace pseudocal
