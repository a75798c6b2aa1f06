// Text matrix files for the loss conformance harness. Format: a header line
// `rows cols`, then rows*cols row-major decimals separated by whitespace.
#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace seq4d::io {

Eigen::MatrixXd read_matrix(const std::filesystem::path& path);
void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);

}  // namespace seq4d::io
