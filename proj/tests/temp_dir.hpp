// Scratch directory that cleans up after itself.
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag = "seq4d_test") {
    static std::atomic<unsigned> counter{0};
    const auto ticks =
        std::chrono::steady_clock::now().time_since_epoch().count();
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(ticks) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};
