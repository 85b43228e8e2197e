#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace brepchain {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using PointSet = std::vector<Vec3>;

/// Number of samples along a curve.
inline constexpr int kCurveSamples = 30;
/// Samples per side of a patch grid.
inline constexpr int kPatchSide = 10;
inline constexpr int kPatchSamples = kPatchSide * kPatchSide;

// Error hierarchy. Every failure the library reports is one of these; the C
// API maps each class onto a status code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument (NaN costs, empty point sets, out-of-range probabilities).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Matrix dimensions disagree with element counts, or an invariant is broken.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed document; `locus` names the offending record.
class ParseError : public Error {
 public:
  ParseError(const std::string& locus, const std::string& what)
      : Error(locus.empty() ? what : locus + ": " + what), locus_(locus) {}
  const std::string& locus() const { return locus_; }

 private:
  std::string locus_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Geometric fit could not be performed (degenerate configuration).
class FitError : public Error {
 public:
  using Error::Error;
};

enum class SolverFailure { Infeasible, Timeout, EmptyCandidates };

class SolverError : public Error {
 public:
  SolverError(SolverFailure kind, const std::string& what) : Error(what), kind_(kind) {}
  SolverFailure kind() const { return kind_; }

 private:
  SolverFailure kind_;
};

}  // namespace brepchain
