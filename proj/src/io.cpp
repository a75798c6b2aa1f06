#include "seq4d/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seq4d::io {

namespace {

// All file formats are little-endian regardless of host.
static_assert(std::endian::native == std::endian::little,
              "big-endian hosts need byte swapping in io.cpp");

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return bytes;
}

void write_all(const std::filesystem::path& path, const void* data,
               std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

Scan read_scan(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_all(path);
  if (bytes.size() % 16 != 0) {
    throw std::runtime_error("truncated scan: " + path.string() + " (" +
                             std::to_string(bytes.size()) + " bytes)");
  }
  const std::size_t n = bytes.size() / 16;
  Scan scan;
  scan.points.resize(n);
  const float* f = reinterpret_cast<const float*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    Point& p = scan.points[i];
    p.x = static_cast<double>(f[4 * i + 0]);
    p.y = static_cast<double>(f[4 * i + 1]);
    p.z = static_cast<double>(f[4 * i + 2]);
    p.intensity = static_cast<double>(f[4 * i + 3]);
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::runtime_error("corrupt scan: non-finite coordinate in " +
                               path.string());
    }
  }
  return scan;
}

void write_scan(const Scan& scan, const std::filesystem::path& path) {
  std::vector<float> buf(scan.points.size() * 4);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Point& p = scan.points[i];
    buf[4 * i + 0] = static_cast<float>(p.x);
    buf[4 * i + 1] = static_cast<float>(p.y);
    buf[4 * i + 2] = static_cast<float>(p.z);
    buf[4 * i + 3] = static_cast<float>(p.intensity);
  }
  write_all(path, buf.data(), buf.size() * sizeof(float));
}

InstanceLabeling read_labels(const std::filesystem::path& path,
                             std::size_t expected_count) {
  const std::vector<char> bytes = read_all(path);
  if (bytes.size() != expected_count * 4) {
    throw std::runtime_error("label/scan length mismatch: " + path.string() +
                             " holds " + std::to_string(bytes.size() / 4) +
                             " labels, expected " +
                             std::to_string(expected_count));
  }
  InstanceLabeling ids(expected_count);
  const std::uint32_t* w = reinterpret_cast<const std::uint32_t*>(bytes.data());
  for (std::size_t i = 0; i < expected_count; ++i) {
    ids[i] = w[i] >> 16;  // instance ID lives in the upper 16 bits
  }
  return ids;
}

void write_labels(const InstanceLabeling& labeling,
                  const std::filesystem::path& path) {
  std::vector<std::uint32_t> words(labeling.size());
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (labeling[i] > 0xFFFFu) {
      throw std::runtime_error("instance ID " + std::to_string(labeling[i]) +
                               " does not fit the 16-bit label field");
    }
    words[i] = labeling[i] << 16;  // semantic class written as 0
  }
  write_all(path, words.data(), words.size() * sizeof(std::uint32_t));
}

std::vector<Pose> read_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) {
      vals.push_back(v);
    }
    if (vals.empty()) {
      continue;  // blank line
    }
    if (vals.size() != 12) {
      throw std::runtime_error("pose parse error at " + path.string() +
                               " line " + std::to_string(line_no) + ": got " +
                               std::to_string(vals.size()) +
                               " values, expected 12");
    }
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    for (int row = 0; row < 3; ++row) {
      r(row, 0) = vals[4 * row + 0];
      r(row, 1) = vals[4 * row + 1];
      r(row, 2) = vals[4 * row + 2];
      t(row) = vals[4 * row + 3];
    }
    poses.emplace_back(r, t);
  }
  return poses;
}

void write_poses(std::span<const Pose> poses,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  char buf[32];
  for (const Pose& pose : poses) {
    const Eigen::Matrix3d& r = pose.rotation();
    const Eigen::Vector3d& t = pose.translation();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 4; ++col) {
        const double v = col < 3 ? r(row, col) : t(row);
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
        if (row != 2 || col != 3) {
          out << ' ';
        }
      }
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::vector<std::uint8_t> read_ground_mask(const std::filesystem::path& path,
                                           std::size_t expected_count) {
  const std::vector<char> bytes = read_all(path);
  if (bytes.size() != expected_count) {
    throw std::runtime_error("ground mask length mismatch: " + path.string());
  }
  std::vector<std::uint8_t> mask(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    mask[i] = static_cast<std::uint8_t>(bytes[i]) ? 1 : 0;
  }
  return mask;
}

void write_ground_mask(std::span<const std::uint8_t> mask,
                       const std::filesystem::path& path) {
  write_all(path, mask.data(), mask.size());
}

std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::string& extension) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Sequence load_sequence(const std::filesystem::path& scan_dir,
                       const std::filesystem::path& pose_file) {
  Sequence seq;
  const auto files = list_files(scan_dir, ".bin");
  if (files.empty()) {
    throw std::runtime_error("no .bin scans in " + scan_dir.string());
  }
  int frame = 0;
  for (const auto& file : files) {
    Scan scan = read_scan(file);
    scan.frame_index = frame++;
    seq.scans.push_back(std::move(scan));
  }
  if (pose_file.empty()) {
    seq.poses.assign(seq.scans.size(), Pose());
  } else {
    seq.poses = read_poses(pose_file);
    if (seq.poses.size() != seq.scans.size()) {
      throw std::runtime_error(
          "pose file has " + std::to_string(seq.poses.size()) +
          " poses for " + std::to_string(seq.scans.size()) + " scans");
    }
  }
  return seq;
}

}  // namespace seq4d::io
