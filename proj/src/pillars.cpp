#include "pseudocal/pillars.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "pseudocal/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace pseudocal {

int PillarGridConfig::rows() const {
  return static_cast<int>(std::ceil((y_max - y_min) / cell_size));
}

int PillarGridConfig::cols() const {
  return static_cast<int>(std::ceil((x_max - x_min) / cell_size));
}

void PillarGridConfig::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min))
    raise(ErrorCode::config_error, "grid extents must be positive");
  if (!(cell_size > 0.0))
    raise(ErrorCode::config_error, "cell_size must be positive");
  if (rows() > 2048 || cols() > 2048)
    raise(ErrorCode::config_error, "grid dimensions exceed 2048 cells");
  if (max_points_per_pillar < 1)
    raise(ErrorCode::config_error, "max_points_per_pillar must be >= 1");
  if (!(z_clip_max >= z_clip_min))
    raise(ErrorCode::config_error, "z clip band is empty");
}

PillarImage pillarize(const PointCloud& cloud, const PillarGridConfig& cfg) {
  cfg.validate();
  PillarImage img;
  img.config = cfg;
  img.rows = cfg.rows();
  img.cols = cfg.cols();
  img.features.assign(img.cell_count() * PillarImage::kFeatureCount, 0.0f);

  struct Acc {
    double sum_x = 0, sum_y = 0, sum_z = 0;
    double min_z = std::numeric_limits<double>::infinity();
    double max_z = -std::numeric_limits<double>::infinity();
    int n = 0;
  };
  std::vector<Acc> acc(img.cell_count());

  const int cap = cfg.max_points_per_pillar;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double px = cloud.x[i], py = cloud.y[i], pz = cloud.z[i];
    if (px < cfg.x_min || px >= cfg.x_max) continue;
    if (py < cfg.y_min || py >= cfg.y_max) continue;
    if (pz < cfg.z_clip_min || pz > cfg.z_clip_max) continue;
    const int col = static_cast<int>(std::floor((px - cfg.x_min) / cfg.cell_size));
    const int row = static_cast<int>(std::floor((py - cfg.y_min) / cfg.cell_size));
    if (col < 0 || col >= img.cols || row < 0 || row >= img.rows) continue;
    Acc& a = acc[static_cast<std::size_t>(row) * img.cols + col];
    if (a.n >= cap) continue;
    a.sum_x += px;
    a.sum_y += py;
    a.sum_z += pz;
    a.min_z = std::min(a.min_z, pz);
    a.max_z = std::max(a.max_z, pz);
    a.n += 1;
  }

  for (int row = 0; row < img.rows; ++row) {
    const double center_y = cfg.y_min + (row + 0.5) * cfg.cell_size;
    for (int col = 0; col < img.cols; ++col) {
      const Acc& a = acc[static_cast<std::size_t>(row) * img.cols + col];
      if (a.n == 0) continue;
      const double center_x = cfg.x_min + (col + 0.5) * cfg.cell_size;
      float* f = img.features.data() +
                 (static_cast<std::size_t>(row) * img.cols + col) *
                     PillarImage::kFeatureCount;
      f[0] = static_cast<float>(static_cast<double>(a.n) / cap);
      f[1] = static_cast<float>(a.sum_x / a.n - center_x);
      f[2] = static_cast<float>(a.sum_y / a.n - center_y);
      f[3] = static_cast<float>(a.sum_z / a.n);
      f[4] = static_cast<float>(a.min_z);
      f[5] = static_cast<float>(a.max_z);
    }
  }
  return img;
}

std::vector<float> occupancy(const PillarImage& img) {
  std::vector<float> grid(img.cell_count());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = img.features[i * PillarImage::kFeatureCount];
  return grid;
}

PillarImage downsample(const PillarImage& img, int factor) {
  if (factor < 1 || img.rows % factor != 0 || img.cols % factor != 0)
    raise(ErrorCode::dimension_mismatch,
          "downsample factor must divide both grid dimensions");
  if (factor == 1) return img;

  PillarImage out;
  out.rows = img.rows / factor;
  out.cols = img.cols / factor;
  out.config = img.config;
  out.config.cell_size = img.config.cell_size * factor;
  out.features.assign(out.cell_count() * PillarImage::kFeatureCount, 0.0f);

  for (int row = 0; row < out.rows; ++row)
    for (int col = 0; col < out.cols; ++col) {
      double sum_occ = 0.0, wsum_dx = 0.0, wsum_dy = 0.0, wsum_z = 0.0;
      double min_z = std::numeric_limits<double>::infinity();
      double max_z = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int dr = 0; dr < factor; ++dr)
        for (int dc = 0; dc < factor; ++dc) {
          const float* f = img.cell(row * factor + dr, col * factor + dc);
          const double occ = f[0];
          sum_occ += occ;
          if (occ <= 0.0) continue;
          any = true;
          wsum_dx += occ * f[1];
          wsum_dy += occ * f[2];
          wsum_z += occ * f[3];
          min_z = std::min(min_z, static_cast<double>(f[4]));
          max_z = std::max(max_z, static_cast<double>(f[5]));
        }
      if (!any) continue;
      float* out_f = out.features.data() +
                     (static_cast<std::size_t>(row) * out.cols + col) *
                         PillarImage::kFeatureCount;
      const double block = static_cast<double>(factor) * factor;
      out_f[0] = static_cast<float>(sum_occ / block);
      out_f[1] = static_cast<float>(wsum_dx / sum_occ);
      out_f[2] = static_cast<float>(wsum_dy / sum_occ);
      out_f[3] = static_cast<float>(wsum_z / sum_occ);
      out_f[4] = static_cast<float>(min_z);
      out_f[5] = static_cast<float>(max_z);
    }
  return out;
}

namespace {

constexpr char kMagic[4] = {'P', 'I', 'L', 'R'};

template <typename T>
void append_raw(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T read_raw(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size())
    raise(ErrorCode::format_error, "truncated pillar blob");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const PillarImage& img) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 8 + 8 * sizeof(double) + img.features.size() * sizeof(float));
  out.insert(out.end(), kMagic, kMagic + 4);
  append_raw(out, static_cast<std::uint32_t>(img.rows));
  append_raw(out, static_cast<std::uint32_t>(img.cols));
  const double cfg[8] = {img.config.x_min,     img.config.x_max,
                         img.config.y_min,     img.config.y_max,
                         img.config.cell_size,
                         static_cast<double>(img.config.max_points_per_pillar),
                         img.config.z_clip_min, img.config.z_clip_max};
  for (double v : cfg) append_raw(out, v);
  for (float v : img.features) append_raw(out, v);
  return out;
}

PillarImage deserialize_pillars(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    raise(ErrorCode::format_error, "missing PILR magic");
  pos = 4;
  PillarImage img;
  img.rows = static_cast<int>(read_raw<std::uint32_t>(bytes, pos));
  img.cols = static_cast<int>(read_raw<std::uint32_t>(bytes, pos));
  img.config.x_min = read_raw<double>(bytes, pos);
  img.config.x_max = read_raw<double>(bytes, pos);
  img.config.y_min = read_raw<double>(bytes, pos);
  img.config.y_max = read_raw<double>(bytes, pos);
  img.config.cell_size = read_raw<double>(bytes, pos);
  img.config.max_points_per_pillar =
      static_cast<int>(read_raw<double>(bytes, pos));
  img.config.z_clip_min = read_raw<double>(bytes, pos);
  img.config.z_clip_max = read_raw<double>(bytes, pos);
  const std::size_t n = static_cast<std::size_t>(img.rows) * img.cols *
                        PillarImage::kFeatureCount;
  if (bytes.size() - pos != n * sizeof(float))
    raise(ErrorCode::format_error, "pillar blob payload size mismatch");
  img.features.resize(n);
  std::memcpy(img.features.data(), bytes.data() + pos, n * sizeof(float));
  return img;
}

double occupancy_ncc(const PillarImage& a, const PillarImage& b,
                     int row_shift, int col_shift) {
  if (a.rows != b.rows || a.cols != b.cols)
    raise(ErrorCode::dimension_mismatch, "occupancy grids differ in size");
  const std::vector<float> ga = occupancy(a);
  const std::vector<float> gb = occupancy(b);
  const double na = std::sqrt(kernels::sumsq_f32(ga.data(), ga.size()));
  const double nb = std::sqrt(kernels::sumsq_f32(gb.data(), gb.size()));
  if (na == 0.0 || nb == 0.0)
    raise(ErrorCode::no_overlap, "occupancy grid is all-zero");

  double cross = 0.0;
  const int rows = a.rows, cols = a.cols;
  for (int r = 0; r < rows; ++r) {
    const int ra = r + row_shift;
    if (ra < 0 || ra >= rows) continue;
    const int c_lo = std::max(0, -col_shift);
    const int c_hi = std::min(cols, cols - col_shift);
    if (c_lo >= c_hi) continue;
    cross += kernels::dot_f32(
        ga.data() + static_cast<std::size_t>(ra) * cols + c_lo + col_shift,
        gb.data() + static_cast<std::size_t>(r) * cols + c_lo,
        static_cast<std::size_t>(c_hi - c_lo));
  }
  return cross / (na * nb);
}

}  // namespace pseudocal
