#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gaussmap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent chart or option parameters.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Raised by errors that can be attributed to a single grid node.
class NodeError : public Error {
 public:
  NodeError(const std::string& what, std::int64_t node)
      : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::int64_t node() const { return node_; }

 private:
  std::int64_t node_;
};

class SamplingError : public NodeError {
 public:
  using NodeError::NodeError;
};

class SingularMetricError : public NodeError {
 public:
  using NodeError::NodeError;
};

class InvalidGaussMapError : public NodeError {
 public:
  using NodeError::NodeError;
};

class InvalidGrassmannDataError : public NodeError {
 public:
  using NodeError::NodeError;
};

class NotPsdError : public NodeError {
 public:
  using NodeError::NodeError;
};

class DegenerateGaussMapError : public NodeError {
 public:
  using NodeError::NodeError;
};

/// An antisymmetric argument that is not antisymmetric, or a chart outside a
/// surface's parametrization window.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested h-recovery route does not apply to the data at hand.
class RoutingError : public Error {
 public:
  using Error::Error;
};

class NonIntegrableError : public Error {
 public:
  NonIntegrableError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaussmap
