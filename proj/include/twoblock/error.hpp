#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace twoblock {

/// Base class for data and numeric failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A location/scale estimate of zero for some column.
class ZeroScaleError : public Error {
 public:
  ZeroScaleError(const std::string& what, Eigen::Index column)
      : Error(what), column_(column) {}

  Eigen::Index column() const noexcept { return column_; }

 private:
  Eigen::Index column_;
};

/// An iterative solver ran out of iterations; carries the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : Error(what), last_iterate_(std::move(last_iterate)) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

}  // namespace twoblock
