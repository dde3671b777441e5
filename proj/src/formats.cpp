#include "pseudocal/formats.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace pseudocal {

namespace {

std::map<std::string, std::vector<double>> parse_key_lines(
    std::string_view text) {
  std::map<std::string, std::vector<double>> out;
  std::istringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
      key.pop_back();
    if (key.empty()) continue;
    std::istringstream values(line.substr(colon + 1));
    std::vector<double> vals;
    double v;
    while (values >> v) vals.push_back(v);
    out[key] = std::move(vals);
  }
  return out;
}

const std::vector<double>& require_key(
    const std::map<std::string, std::vector<double>>& kv,
    const std::string& key, std::size_t count) {
  const auto it = kv.find(key);
  if (it == kv.end())
    raise(ErrorCode::parse_error, "missing key '" + key + "'");
  if (it->second.size() != count)
    raise(ErrorCode::parse_error,
          "key '" + key + "' expects " + std::to_string(count) + " values, got " +
              std::to_string(it->second.size()));
  return it->second;
}

std::string format_values(const double* values, std::size_t n) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out += ' ';
    out += buf;
  }
  return out;
}

}  // namespace

KittiCalib parse_kitti_calib(std::string_view text) {
  const auto kv = parse_key_lines(text);
  const auto& r = require_key(kv, "R", 9);
  const auto& t = require_key(kv, "T", 3);

  std::array<double, 9> m;
  std::copy(r.begin(), r.end(), m.begin());
  KittiCalib calib;
  // Accept slightly non-orthonormal matrices (text round-off) by snapping to
  // the nearest rotation; beyond 1e-3 the file is considered corrupt.
  RotationMatrix probe = RotationMatrix::from_array_unchecked(m);
  const double residual = probe.max_orthonormality_residual();
  if (residual > 1e-3 || probe.determinant() < 0.0)
    raise(ErrorCode::calib_error,
          "R is not a rotation (orthonormality residual " +
              std::to_string(residual) + ")");
  calib.velo_to_cam.rotation =
      residual <= 1e-9 ? RotationMatrix::from_array_unchecked(m)
                       : nearest_rotation(m);
  std::copy(t.begin(), t.end(), calib.velo_to_cam.translation.begin());

  double fu, fv, cu, cv;
  if (kv.count("P2")) {
    const auto& p = require_key(kv, "P2", 12);
    fu = p[0]; cu = p[2]; fv = p[5]; cv = p[6];
  } else if (kv.count("K")) {
    const auto& k = require_key(kv, "K", 9);
    fu = k[0]; cu = k[2]; fv = k[4]; cv = k[5];
  } else {
    raise(ErrorCode::parse_error, "missing key 'P2' (or 'K')");
  }
  int width, height;
  if (kv.count("S2")) {
    const auto& s = require_key(kv, "S2", 2);
    width = static_cast<int>(std::lround(s[0]));
    height = static_cast<int>(std::lround(s[1]));
  } else {
    // No stated image size: smallest image containing the principal point.
    width = static_cast<int>(std::ceil(2.0 * cu)) + 1;
    height = static_cast<int>(std::ceil(2.0 * cv)) + 1;
  }
  calib.intrinsics = CameraIntrinsics{fu, fv, cu, cv, width, height};
  calib.intrinsics.validate();
  return calib;
}

std::string write_kitti_calib(const KittiCalib& calib) {
  std::string out;
  out += "R:" + format_values(calib.velo_to_cam.rotation.data(), 9) + "\n";
  out += "T:" + format_values(calib.velo_to_cam.translation.data(), 3) + "\n";
  const CameraIntrinsics& k = calib.intrinsics;
  const double p2[12] = {k.f_u, 0, k.c_u, 0, 0, k.f_v, k.c_v, 0, 0, 0, 1, 0};
  out += "P2:" + format_values(p2, 12) + "\n";
  const double s2[2] = {static_cast<double>(k.width),
                        static_cast<double>(k.height)};
  out += "S2:" + format_values(s2, 2) + "\n";
  return out;
}

PointCloud read_velodyne_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 16 != 0)
    raise(ErrorCode::format_error,
          "velodyne payload length " + std::to_string(bytes.size()) +
              " is not a multiple of 16");
  const std::size_t n = bytes.size() / 16;
  PointCloud cloud;
  cloud.reserve(n);
  cloud.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v[4];
    std::memcpy(v, bytes.data() + i * 16, 16);
    cloud.add(v[0], v[1], v[2], v[3]);
  }
  return cloud;
}

std::vector<std::uint8_t> write_velodyne_bin(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.resize(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float v[4] = {static_cast<float>(cloud.x[i]),
                        static_cast<float>(cloud.y[i]),
                        static_cast<float>(cloud.z[i]),
                        cloud.has_intensity() ? cloud.intensity[i] : 0.0f};
    std::memcpy(out.data() + i * 16, v, 16);
  }
  return out;
}

namespace {

struct PngReadState {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->pos + n > state->size)
    png_error(png, "read past end of buffer");
  std::memcpy(out, state->data + state->pos, n);
  state->pos += n;
}

void png_mem_write(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_mem_flush(png_structp) {}

}  // namespace

DepthMap read_depth_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    raise(ErrorCode::format_error, "not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::io_error, "libpng initialization failed");
  }

  std::vector<std::uint16_t> raw;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::format_error, "corrupt PNG stream");
  }

  PngReadState state{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &state, png_mem_read);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::format_error,
          "expected 16-bit single-channel PNG, got bit depth " +
              std::to_string(bit_depth) + ", color type " +
              std::to_string(color_type));
  }
  png_set_swap(png);  // PNG is big-endian on the wire

  raw.resize(static_cast<std::size_t>(width) * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(raw.data() +
                                          static_cast<std::size_t>(y) * width);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  DepthMap out = DepthMap::invalid_sized(static_cast<int>(width),
                                         static_cast<int>(height));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == 0) continue;
    out.depth[i] = raw[i] / 256.0;
    out.valid[i] = 1;
  }
  return out;
}

std::vector<std::uint8_t> write_depth_png(const DepthMap& depth) {
  depth.validate();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::io_error, "libpng initialization failed");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::io_error, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_mem_write, png_mem_flush);
  png_set_IHDR(png, info, depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);

  std::vector<std::uint16_t> raw(static_cast<std::size_t>(depth.width) *
                                 depth.height);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!depth.valid[i]) continue;
    const double quantized = std::round(depth.depth[i] * 256.0);
    raw[i] = static_cast<std::uint16_t>(
        std::min(65535.0, std::max(0.0, quantized)));
  }
  std::vector<png_bytep> rows(depth.height);
  for (int y = 0; y < depth.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(
        raw.data() + static_cast<std::size_t>(y) * depth.width);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::io_error, "read failed on " + path.string());
  return bytes;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::io_error, "read failed on " + path.string());
  return text;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorCode::io_error, "write failed on " + path.string());
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) raise(ErrorCode::io_error, "write failed on " + path.string());
}

}  // namespace pseudocal
