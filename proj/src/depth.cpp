#include "pseudocal/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pseudocal {

void CameraIntrinsics::validate() const {
  if (!(f_u > 0.0) || !(f_v > 0.0))
    raise(ErrorCode::config_error, "focal lengths must be positive");
  if (width <= 0 || height <= 0)
    raise(ErrorCode::config_error, "image dimensions must be positive");
  if (!(c_u >= 0.0 && c_u < width) || !(c_v >= 0.0 && c_v < height))
    raise(ErrorCode::config_error, "principal point outside the image");
}

DepthMap DepthMap::invalid_sized(int width, int height) {
  DepthMap d;
  d.width = width;
  d.height = height;
  d.depth.assign(static_cast<std::size_t>(width) * height, 0.0);
  d.valid.assign(static_cast<std::size_t>(width) * height, 0);
  return d;
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += (v != 0);
  return n;
}

void DepthMap::validate() const {
  const std::size_t expect = static_cast<std::size_t>(width) * height;
  if (depth.size() != expect || valid.size() != expect)
    raise(ErrorCode::dimension_mismatch, "depth/valid array size mismatch");
}

std::size_t EdgeMask::edge_count() const {
  std::size_t n = 0;
  for (auto v : edge) n += (v != 0);
  return n;
}

void CannyConfig::validate() const {
  if (!(low_threshold >= 0.0) || !(high_threshold <= 255.0) ||
      low_threshold > high_threshold)
    raise(ErrorCode::config_error,
          "thresholds must satisfy 0 <= low <= high <= 255");
  if (!(gaussian_sigma >= 0.0))
    raise(ErrorCode::config_error, "gaussian_sigma must be >= 0");
  if (dilation_radius < 0)
    raise(ErrorCode::config_error, "dilation_radius must be >= 0");
}

PointCloud back_project(const DepthMap& d, const CameraIntrinsics& k) {
  d.validate();
  k.validate();
  if (d.width != k.width || d.height != k.height)
    raise(ErrorCode::dimension_mismatch,
          "depth map and intrinsics disagree on image size");
  PointCloud cloud;
  cloud.reserve(d.valid_count());
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const std::size_t i = d.index(u, v);
      if (!d.valid[i]) continue;
      const double z = d.depth[i];
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      cloud.add((u - k.c_u) * z / k.f_u, (v - k.c_v) * z / k.f_v, z);
    }
  }
  return cloud;
}

namespace {

// Replicated borders for the convolutions; invalid pixels already carry 0.
inline int clamp_coord(int v, int lo, int hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

std::vector<float> normalize_depth(const DepthMap& d) {
  const std::size_t n = d.depth.size();
  std::vector<float> img(n, 0.0f);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!d.valid[i]) continue;
    lo = std::min(lo, d.depth[i]);
    hi = std::max(hi, d.depth[i]);
  }
  if (!(hi > lo)) return img;  // constant or empty: all zero
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < n; ++i) {
    if (!d.valid[i]) continue;
    img[i] = static_cast<float>((d.depth[i] - lo) * scale);
  }
  return img;
}

std::vector<float> gaussian_blur(const std::vector<float>& src, int w, int h,
                                 double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : kernel) v = static_cast<float>(v / sum);

  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] *
               src[static_cast<std::size_t>(y) * w + clamp_coord(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] *
               tmp[static_cast<std::size_t>(clamp_coord(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace

EdgeMask detect_depth_edges(const DepthMap& d, const CannyConfig& cfg) {
  d.validate();
  cfg.validate();
  const int w = d.width, h = d.height;
  EdgeMask mask;
  mask.width = w;
  mask.height = h;
  mask.edge.assign(static_cast<std::size_t>(w) * h, 0);
  if (w < 3 || h < 3) return mask;

  const std::vector<float> smoothed =
      gaussian_blur(normalize_depth(d), w, h, cfg.gaussian_sigma);

  auto px = [&](int x, int y) -> float {
    return smoothed[static_cast<std::size_t>(clamp_coord(y, 0, h - 1)) * w +
                    clamp_coord(x, 0, w - 1)];
  };

  std::vector<float> mag(static_cast<std::size_t>(w) * h, 0.0f);
  std::vector<float> gxv(mag.size(), 0.0f), gyv(mag.size(), 0.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float gx = (px(x + 1, y - 1) + 2.0f * px(x + 1, y) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2.0f * px(x - 1, y) + px(x - 1, y + 1));
      const float gy = (px(x - 1, y + 1) + 2.0f * px(x, y + 1) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2.0f * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxv[i] = gx;
      gyv[i] = gy;
      mag[i] = std::hypot(gx, gy);
    }

  // Non-maximum suppression along the quantized gradient direction.
  std::vector<std::uint8_t> thin(mag.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float m = mag[i];
      if (m <= 0.0f) continue;
      const float angle = std::atan2(gyv[i], gxv[i]);
      // Sector in [0, 4): 0 = horizontal gradient, 1 = 45deg, 2 = vertical, 3 = 135deg.
      int sector =
          static_cast<int>(std::lround(angle * 4.0 / kPi)) & 3;
      int dx = 0, dy = 0;
      switch (sector) {
        case 0: dx = 1; dy = 0; break;
        case 1: dx = 1; dy = 1; break;
        case 2: dx = 0; dy = 1; break;
        case 3: dx = -1; dy = 1; break;
      }
      auto mag_at = [&](int ax, int ay) -> float {
        if (ax < 0 || ax >= w || ay < 0 || ay >= h) return 0.0f;
        return mag[static_cast<std::size_t>(ay) * w + ax];
      };
      if (m >= mag_at(x + dx, y + dy) && m >= mag_at(x - dx, y - dy))
        thin[i] = 1;
    }

  // Double threshold + hysteresis (8-connected flood from strong pixels).
  std::vector<std::uint8_t> state(mag.size(), 0);  // 1 = weak, 2 = strong
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    if (!thin[i]) continue;
    if (mag[i] >= cfg.high_threshold) {
      state[i] = 2;
      stack.push_back(i);
    } else if (mag[i] >= cfg.low_threshold) {
      state[i] = 1;
    }
  }
  std::vector<std::uint8_t> edge(mag.size(), 0);
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (edge[i]) continue;
    edge[i] = 1;
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] >= 1 && !edge[j]) stack.push_back(j);
      }
  }

  if (cfg.dilation_radius > 0) {
    const int r = cfg.dilation_radius;
    std::vector<std::uint8_t> dilated(edge.size(), 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!edge[static_cast<std::size_t>(y) * w + x]) continue;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            dilated[static_cast<std::size_t>(ny) * w + nx] = 1;
          }
      }
    edge.swap(dilated);
  }

  // Invalid pixels are never edges.
  for (std::size_t i = 0; i < edge.size(); ++i)
    mask.edge[i] = edge[i] && d.valid[i];
  return mask;
}

DepthMap filter_edges(const DepthMap& d, const EdgeMask& m) {
  d.validate();
  if (m.width != d.width || m.height != d.height ||
      m.edge.size() != d.depth.size())
    raise(ErrorCode::dimension_mismatch, "edge mask size mismatch");
  DepthMap out = d;
  for (std::size_t i = 0; i < out.valid.size(); ++i)
    if (m.edge[i]) out.valid[i] = 0;
  return out;
}

DepthMap render_depth(const PointCloud& cloud, const CameraIntrinsics& k) {
  k.validate();
  DepthMap out = DepthMap::invalid_sized(k.width, k.height);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double z = cloud.z[i];
    if (!(z > 0.0) || !std::isfinite(z)) continue;
    const long u = std::lround(cloud.x[i] * k.f_u / z + k.c_u);
    const long v = std::lround(cloud.y[i] * k.f_v / z + k.c_v);
    if (u < 0 || u >= k.width || v < 0 || v >= k.height) continue;
    const std::size_t idx = out.index(static_cast<int>(u), static_cast<int>(v));
    if (!out.valid[idx] || z < out.depth[idx]) {
      out.depth[idx] = z;
      out.valid[idx] = 1;
    }
  }
  return out;
}

}  // namespace pseudocal
