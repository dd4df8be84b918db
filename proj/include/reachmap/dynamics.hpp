#pragma once

#include "reachmap/integrator.hpp"
#include "reachmap/types.hpp"

namespace reachmap {

// Uniformly rotating small body with a point-mass + second-degree (C20, C22)
// gravity field. The body spins about the inertial +z axis; the Sun direction
// is frozen over a planning horizon.
struct AsteroidModel {
  double mu = 0.0;          // gravitational parameter [km^3/s^2]
  double spin_rate = 0.0;   // body rotation rate [rad/s]
  double ref_radius = 0.0;  // reference radius of the degree-2 field [km]
  double c20 = 0.0;         // unnormalized coefficients
  double c22 = 0.0;
  double r_impact = 0.0;    // impact constraint radius [km]
  double r_escape = 0.0;    // escape constraint radius [km]
  Vec3 sun_dir = Vec3::UnitX();

  void validate() const;
};

// Body rotation angle at epoch t (zero at t = 0).
inline double body_rotation_angle(const AsteroidModel& model, double t) {
  return model.spin_rate * t;
}

// Rotation taking body-fixed coordinates to inertial coordinates at epoch t.
Mat3 body_to_inertial(const AsteroidModel& model, double t);

// Gravitational acceleration [km/s^2] at an inertial state. Throws
// InvalidStateError on non-finite input or a state at the body center.
Vec3 acceleration(const AsteroidModel& model, const InertialState& state);

// 6x6 Jacobian of the dynamics f(x) = (v, a(r, t)) with respect to x.
Mat6 jacobian(const AsteroidModel& model, const InertialState& state);

// Shared fast path: acceleration and/or its position gradient in one
// evaluation (the body-frame work is common to both).
void gravity_eval(const AsteroidModel& model, const Vec3& r_inertial, double t, Vec3* accel,
                  Mat3* grad);

struct Trajectory {
  DenseOutput dense;  // components: r (0..2), v (3..5)

  InertialState state_at(double t) const {
    Vec6 y;
    dense.eval_block(t, 0, 6, y.data());
    return {y.head<3>(), y.tail<3>(), t};
  }
  InertialState final_state() const { return state_at(dense.t_end()); }
};

struct StmTrajectory {
  DenseOutput dense;  // components: r, v, Phi (column-major, 6..41)

  InertialState state_at(double t) const {
    Vec6 y;
    dense.eval_block(t, 0, 6, y.data());
    return {y.head<3>(), y.tail<3>(), t};
  }
  StateTransitionMatrix stm_at(double t) const {
    Mat6 phi;
    dense.eval_block(t, 6, 36, phi.data());
    return phi;
  }
  InertialState final_state() const { return state_at(dense.t_end()); }
  StateTransitionMatrix final_stm() const { return stm_at(dense.t_end()); }
};

// Adaptive propagation with dense output. Throws PropagationError (carrying
// the last valid time) if the stepper cannot continue.
Trajectory propagate(const AsteroidModel& model, const InertialState& state, double t_end,
                     const IntegratorOptions& opt = {});

// Joint 42-dimensional propagation of the state and the state transition
// matrix Phi(t, t0), with Phi(t0, t0) = I.
StmTrajectory propagate_with_stm(const AsteroidModel& model, const InertialState& state,
                                 double t_end, const IntegratorOptions& opt = {});

}  // namespace reachmap
