#pragma once

#include <stdexcept>
#include <string>

namespace setloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An angular span of half-width >= pi/2 has no bounded convex outer polygon.
class SectorTooWide : public Error {
 public:
  explicit SectorTooWide(double half_width);
  double half_width() const { return half_width_; }

 private:
  double half_width_;
};

enum class FaultStage {
  Candidates,
  SensorHeading,
  SensorPosition,
  Marker,
  RigidBody,
  RobotHeading,
};

const char* to_string(FaultStage stage);

/// An intersection that must contain the true state came out empty. This
/// only happens when a noise bound was violated.
class EmptySetFault : public Error {
 public:
  EmptySetFault(FaultStage stage, int sensor, int marker);

  FaultStage stage() const { return stage_; }
  int sensor() const { return sensor_; }  // -1 when not applicable
  int marker() const { return marker_; }  // -1 when not applicable

 private:
  FaultStage stage_;
  int sensor_;
  int marker_;
};

/// A measurement in a sensor batch is feasible for no marker at all.
class InconsistentBatch : public Error {
 public:
  InconsistentBatch(int sensor, int row, const std::string& why);
  int sensor() const { return sensor_; }
  int row() const { return row_; }

 private:
  int sensor_;
  int row_;
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(std::size_t cap);
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& key, const std::string& message);
  int line() const { return line_; }  // 1-based, 0 when unknown
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace setloc
