#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sumreward {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Malformed input data (files, fixtures, inconsistent dimensions). The CLI
// maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistic that has no value on the given input, e.g. a correlation over
// a constant series.
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace sumreward
