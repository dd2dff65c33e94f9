#include "setloc/errors.hpp"

#include <sstream>

namespace setloc {

SectorTooWide::SectorTooWide(double half_width)
    : Error("sector half-width " + std::to_string(half_width) +
            " rad is not below pi/2"),
      half_width_(half_width) {}

const char* to_string(FaultStage stage) {
  switch (stage) {
    case FaultStage::Candidates: return "candidates";
    case FaultStage::SensorHeading: return "sensor_heading";
    case FaultStage::SensorPosition: return "sensor_position";
    case FaultStage::Marker: return "marker";
    case FaultStage::RigidBody: return "rigid_body";
    case FaultStage::RobotHeading: return "robot_heading";
  }
  return "unknown";
}

namespace {

std::string fault_message(FaultStage stage, int sensor, int marker) {
  std::ostringstream os;
  os << "empty set at stage " << to_string(stage);
  if (sensor >= 0) os << " sensor " << sensor;
  if (marker >= 0) os << " marker " << marker;
  return os.str();
}

std::string config_message(int line, const std::string& key, const std::string& message) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  if (!key.empty()) os << "key '" << key << "': ";
  os << message;
  return os.str();
}

}  // namespace

EmptySetFault::EmptySetFault(FaultStage stage, int sensor, int marker)
    : Error(fault_message(stage, sensor, marker)),
      stage_(stage),
      sensor_(sensor),
      marker_(marker) {}

InconsistentBatch::InconsistentBatch(int sensor, int row, const std::string& why)
    : Error("inconsistent batch from sensor " + std::to_string(sensor) + " row " +
            std::to_string(row) + ": " + why),
      sensor_(sensor),
      row_(row) {}

CapExceeded::CapExceeded(std::size_t cap)
    : Error("assignment count exceeds cap " + std::to_string(cap)) {}

ConfigError::ConfigError(int line, const std::string& key, const std::string& message)
    : Error(config_message(line, key, message)), line_(line), key_(key) {}

}  // namespace setloc
