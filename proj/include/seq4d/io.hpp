// Bit-exact readers and writers for scans, labels, poses and ground masks.
//
// Scan files:   consecutive records of 4 little-endian 32-bit floats
//               (x, y, z, intensity). File size must be divisible by 16.
// Label files:  one little-endian 32-bit word per point; lower 16 bits are
//               the semantic class (written as 0 here), upper 16 bits the
//               instance ID.
// Pose files:   text, one line per scan, 12 whitespace-separated decimals
//               forming a row-major 3x4 [R|t].
// Ground masks: one byte per point (0/1), same ordering as the scan file.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seq4d/core.hpp"

namespace seq4d::io {

Scan read_scan(const std::filesystem::path& path);
void write_scan(const Scan& scan, const std::filesystem::path& path);

InstanceLabeling read_labels(const std::filesystem::path& path,
                             std::size_t expected_count);
void write_labels(const InstanceLabeling& labeling,
                  const std::filesystem::path& path);

std::vector<Pose> read_poses(const std::filesystem::path& path);
void write_poses(std::span<const Pose> poses,
                 const std::filesystem::path& path);

std::vector<std::uint8_t> read_ground_mask(const std::filesystem::path& path,
                                           std::size_t expected_count);
void write_ground_mask(std::span<const std::uint8_t> mask,
                       const std::filesystem::path& path);

// Sorted list of files with the given extension (".bin", ".label", ...).
std::vector<std::filesystem::path> list_files(
    const std::filesystem::path& dir, const std::string& extension);

// Loads a directory of scan files plus a pose file into a Sequence, assigning
// frame indices 0..n-1 in filename order. An empty pose path yields identity
// poses.
Sequence load_sequence(const std::filesystem::path& scan_dir,
                       const std::filesystem::path& pose_file);

}  // namespace seq4d::io
