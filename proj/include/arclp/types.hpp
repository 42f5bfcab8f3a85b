#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace arclp {

using Vec = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

// Inconsistent dimensions or otherwise malformed inputs.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model is well formed but cannot be handled (unsupported feature,
// contradictory bounds).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, const std::string& source = "")
      : std::runtime_error(source.empty()
                               ? "line " + std::to_string(line) + ": " + message
                               : source + ":" + std::to_string(line) + ": " + message),
        message_(message),
        line_(line) {}

  int line() const { return line_; }
  // The message without the location prefix.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
};

}  // namespace arclp
