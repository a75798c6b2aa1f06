#include "seq4d/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace seq4d::io {

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  long long rows, cols;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw std::runtime_error("bad matrix header in " + path.string());
  }
  Eigen::MatrixXd m(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) {
      if (!(in >> m(r, c))) {
        throw std::runtime_error("matrix " + path.string() +
                                 " is shorter than its header promises");
      }
    }
  }
  return m;
}

void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << buf << (c + 1 == m.cols() ? '\n' : ' ');
    }
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace seq4d::io
