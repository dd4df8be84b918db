#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace reachmap {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

// Sensitivity of the state at time t to the state at t0.
using StateTransitionMatrix = Mat6;

// Spacecraft state in the asteroid-centered inertial frame.
struct InertialState {
  Vec3 r;     // position [km]
  Vec3 v;     // velocity [km/s]
  double t;   // epoch [s]

  Vec6 vec() const {
    Vec6 y;
    y << r, v;
    return y;
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

// Adaptive stepper could not continue; carries the last time at which the
// solution was still valid.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time(last_valid_time) {}

  double last_valid_time;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace reachmap
