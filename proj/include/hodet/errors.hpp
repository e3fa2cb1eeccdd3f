#pragma once

#include <stdexcept>
#include <string>

namespace hodet {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors that stem from bad input data (files, annotations, datasets).
// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidBox : public Error {
 public:
  using Error::Error;
};

class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

class InvalidImage : public DataError {
 public:
  using DataError::DataError;
};

class NoGroundTruth : public DataError {
 public:
  using DataError::DataError;
};

class InvalidAction : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class StaleCache : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientExperiences : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public DataError {
 public:
  using DataError::DataError;
};

class InfeasiblePlacement : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class MissingImage : public DataError {
 public:
  using DataError::DataError;
};

class TreeTooLarge : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hodet
