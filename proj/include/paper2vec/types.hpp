#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace paper2vec {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data. Messages carry the offending line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Unknown document, or a document without a usable embedding.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace paper2vec
