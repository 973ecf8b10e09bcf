#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A joint landed at or behind the camera plane (z' <= 0).
class NonPositiveDepth : public Error {
 public:
  explicit NonPositiveDepth(int joint_index)
      : Error("non-positive depth at joint " + std::to_string(joint_index)),
        joint_index(joint_index) {}
  int joint_index;
};

class SkeletonMismatch : public Error {
 public:
  explicit SkeletonMismatch(const std::string& what = "skeleton mismatch")
      : Error(what) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what = "empty input") : Error(what) {}
};

class EmptyLibrary : public Error {
 public:
  EmptyLibrary() : Error("exemplar library is empty") {}
};

// 2D normalization scale collapsed below the usable threshold.
class DegenerateScale : public Error {
 public:
  explicit DegenerateScale(double scale)
      : Error("degenerate 2D scale " + std::to_string(scale)) {}
};

// Alignment input is collinear or coincident; rotation is not unique.
class DegenerateConfiguration : public Error {
 public:
  explicit DegenerateConfiguration(const std::string& what)
      : Error(what) {}
};

class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Malformed textual input (CSV/JSON); message carries the offending location.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

class FormatVersionMismatch : public FormatError {
 public:
  explicit FormatVersionMismatch(const std::string& what)
      : FormatError(what) {}
};

// A stored 2D projection disagrees with reprojecting the stored pose.
class CorruptProjectionCache : public FormatError {
 public:
  explicit CorruptProjectionCache(const std::string& what)
      : FormatError(what) {}
};

}  // namespace poselift
