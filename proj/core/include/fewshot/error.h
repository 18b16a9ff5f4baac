#pragma once

#include <stdexcept>
#include <string>

namespace fewshot {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (CoNLL, JSON, episode, store or checkpoint).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid combination of options or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dimension or shape disagreement between inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A sampler request that the data cannot satisfy.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// An embedding record required by an episode is not in the store.
class MissingRecordError : public Error {
 public:
  using Error::Error;
};

// Geometry that makes the error-nulling projection undefined.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace fewshot
