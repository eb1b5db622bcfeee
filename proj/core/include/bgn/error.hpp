#pragma once

#include <stdexcept>
#include <string>

namespace bgn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix/vector dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (CSV cells, model files, label values).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or parameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A linear system could not be solved even after jitter.
class SolverError : public Error {
 public:
  using Error::Error;
};

// No usable hyperplane could be placed on the first neuron of a layer.
class LayerAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace bgn
