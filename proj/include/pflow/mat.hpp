#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace pflow {

// Dense real matrices are the universal carrier throughout the library.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotPsd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Mat& a) { return a.allFinite(); }

/// Matrix text format: first line "rows cols", then row-major
/// whitespace-separated entries printed with 17 significant digits
/// (lossless double round-trip).
void write_matrix(std::ostream& os, const Mat& a);
void write_matrix(const std::string& path, const Mat& a);
Mat read_matrix(std::istream& is);
Mat read_matrix(const std::string& path);

// Vectors travel as single-column matrices.
void write_vector(const std::string& path, const Vec& v);
Vec read_vector(const std::string& path);

}  // namespace pflow
