#include "pflow/mat.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace pflow {

void write_matrix(std::ostream& os, const Mat& a) {
  os << a.rows() << ' ' << a.cols() << '\n';
  os << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) os << ' ';
      os << a(i, j);
    }
    os << '\n';
  }
}

void write_matrix(const std::string& path, const Mat& a) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open for writing: " + path);
  write_matrix(f, a);
  if (!f) throw std::runtime_error("write failed: " + path);
}

Mat read_matrix(std::istream& is) {
  Index rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw InvalidInput("matrix header must be 'rows cols' with nonnegative values");
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(is >> a(i, j)))
        throw InvalidInput("matrix body truncated or malformed");
  return a;
}

Mat read_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open for reading: " + path);
  return read_matrix(f);
}

void write_vector(const std::string& path, const Vec& v) {
  write_matrix(path, Mat(v));
}

Vec read_vector(const std::string& path) {
  Mat a = read_matrix(path);
  if (a.cols() != 1) throw InvalidInput("expected single-column vector file: " + path);
  return Vec(a.col(0));
}

}  // namespace pflow
