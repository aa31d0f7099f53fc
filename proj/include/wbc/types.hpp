#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wbc {

// All dense matrices are Eigen's default column-major layout. A transport plan
// for distribution t is an m x m_t matrix: rows index barycenter support
// points, columns index the support points of distribution t.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixList = std::vector<Matrix>;
using VectorList = std::vector<Vector>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Underflow, overflow, NaN or a zero denominator inside an iterative scheme.
class NumericalInstability : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace wbc
