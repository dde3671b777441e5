#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudocal/depth.hpp"
#include "pseudocal/se3.hpp"

namespace pseudocal {

/// KITTI-style calibration: "KEY: v1 v2 ..." lines. R (9 floats) and
/// T (3 floats) give the velo->cam transform in the optical frame; P2
/// (3x4, 12 floats) or K (3x3, 9 floats) gives the intrinsics; optional
/// S2 (2 floats) gives image width/height.
struct KittiCalib {
  RigidTransform velo_to_cam;  // optical camera frame
  CameraIntrinsics intrinsics;
};

KittiCalib parse_kitti_calib(std::string_view text);
std::string write_kitti_calib(const KittiCalib& calib);

/// Packed little-endian f32 (x, y, z, intensity) per point.
PointCloud read_velodyne_bin(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_velodyne_bin(const PointCloud& cloud);

/// 16-bit single-channel PNG; meters = raw / 256, raw 0 = invalid.
DepthMap read_depth_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_depth_png(const DepthMap& depth);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace pseudocal
