#pragma once

#include <stdexcept>
#include <string>

namespace pipefuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or weight dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A formula was evaluated outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A detection box lies outside its view frame beyond the clamp tolerance.
class OutOfFrameError : public Error {
 public:
  OutOfFrameError(std::string box_id, const std::string& what)
      : Error(what), box_id_(std::move(box_id)) {}
  const std::string& box_id() const noexcept { return box_id_; }

 private:
  std::string box_id_;
};

/// Labels of a triple do not form one of the three orientation groups.
class LabelConflictError : public Error {
 public:
  using Error::Error;
};

/// Scene generation could not place the requested pipelines.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, ids, schemas).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipefuse
