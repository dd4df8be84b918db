#include "reachmap/dynamics.hpp"

#include <cmath>

namespace reachmap {

void AsteroidModel::validate() const {
  if (!(mu > 0.0)) throw InvalidStateError("asteroid model: mu must be positive");
  if (!(ref_radius > 0.0)) throw InvalidStateError("asteroid model: ref_radius must be positive");
  if (!(r_impact > 0.0 && r_impact < r_escape))
    throw InvalidStateError("asteroid model: need 0 < r_impact < r_escape");
  if (std::abs(sun_dir.norm() - 1.0) > 1e-12)
    throw InvalidStateError("asteroid model: sun_dir must be a unit vector");
  if (!std::isfinite(spin_rate) || !std::isfinite(c20) || !std::isfinite(c22))
    throw InvalidStateError("asteroid model: non-finite field");
}

Mat3 body_to_inertial(const AsteroidModel& model, double t) {
  const double th = body_rotation_angle(model, t);
  const double c = std::cos(th), s = std::sin(th);
  Mat3 rot;
  rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return rot;
}

namespace {

// Body-frame gradient and Hessian of the degree-2 exterior potential
//   U(p) = mu/rho + mu R^2 [ c20 (3 pz^2 - rho^2) / (2 rho^5)
//                           + 3 c22 (px^2 - py^2) / rho^5 ].
void potential_derivatives(const AsteroidModel& m, const Vec3& p, Vec3* grad, Mat3* hess) {
  const double rho2 = p.squaredNorm();
  const double rho = std::sqrt(rho2);
  const double r3 = rho2 * rho;
  const double r5 = r3 * rho2;
  const double r7 = r5 * rho2;
  const double r9 = r7 * rho2;
  const double x = p.x(), y = p.y(), z = p.z();

  const double A = 0.5 * m.mu * m.ref_radius * m.ref_radius * m.c20;
  const double B = 3.0 * m.mu * m.ref_radius * m.ref_radius * m.c22;
  const double g = x * x - y * y;

  if (grad) {
    Vec3 out = -m.mu / r3 * p;  // point mass
    if (A != 0.0) {
      // A * (3 z^2/rho^5 - 1/rho^3)
      out.x() += A * (-15.0 * x * z * z / r7 + 3.0 * x / r5);
      out.y() += A * (-15.0 * y * z * z / r7 + 3.0 * y / r5);
      out.z() += A * (6.0 * z / r5 - 15.0 * z * z * z / r7 + 3.0 * z / r5);
    }
    if (B != 0.0) {
      // B * (x^2 - y^2)/rho^5
      out.x() += B * (2.0 * x / r5 - 5.0 * x * g / r7);
      out.y() += B * (-2.0 * y / r5 - 5.0 * y * g / r7);
      out.z() += B * (-5.0 * z * g / r7);
    }
    *grad = out;
  }

  if (hess) {
    const Mat3 ppT = p * p.transpose();
    Mat3 H = m.mu * (3.0 * ppT / r5 - Mat3::Identity() / r3);
    if (A != 0.0) {
      // Hessians of z^2/rho^5 and 1/rho^5 via monomial rules.
      const Mat3 Hu = 35.0 * ppT / r9 - 5.0 * Mat3::Identity() / r7;  // d2(rho^-5)
      const Vec3 du = -5.0 / r7 * p;                                  // d(rho^-5)
      Mat3 Hf2 = z * z * Hu;
      Vec3 ez = Vec3::UnitZ();
      Hf2 += 2.0 * z * (ez * du.transpose() + du * ez.transpose());
      Hf2 += 2.0 / r5 * (ez * ez.transpose());
      const Mat3 Hf3 = 15.0 * ppT / r7 - 3.0 * Mat3::Identity() / r5;  // d2(rho^-3)
      H += A * (3.0 * Hf2 - Hf3);
    }
    if (B != 0.0) {
      const Mat3 Hu = 35.0 * ppT / r9 - 5.0 * Mat3::Identity() / r7;
      const Vec3 du = -5.0 / r7 * p;
      Vec3 dg(2.0 * x, -2.0 * y, 0.0);
      Mat3 Hg = Mat3::Zero();
      Hg(0, 0) = 2.0;
      Hg(1, 1) = -2.0;
      Mat3 Hf4 = Hg / r5 + dg * du.transpose() + du * dg.transpose() + g * Hu;
      H += B * Hf4;
    }
    *hess = H;
  }
}

inline void check_state(const InertialState& s) {
  if (!s.r.allFinite() || !s.v.allFinite() || !std::isfinite(s.t))
    throw InvalidStateError("non-finite state component");
  if (s.r.squaredNorm() == 0.0) throw InvalidStateError("state at the body center");
}

}  // namespace

void gravity_eval(const AsteroidModel& model, const Vec3& r_inertial, double t, Vec3* accel,
                  Mat3* grad) {
  const Mat3 rot = body_to_inertial(model, t);
  const Vec3 p = rot.transpose() * r_inertial;
  Vec3 g_body;
  Mat3 h_body;
  potential_derivatives(model, p, accel ? &g_body : nullptr, grad ? &h_body : nullptr);
  if (accel) *accel = rot * g_body;
  if (grad) *grad = rot * h_body * rot.transpose();
}

Vec3 acceleration(const AsteroidModel& model, const InertialState& state) {
  check_state(state);
  Vec3 a;
  gravity_eval(model, state.r, state.t, &a, nullptr);
  return a;
}

Mat6 jacobian(const AsteroidModel& model, const InertialState& state) {
  check_state(state);
  Mat3 h;
  gravity_eval(model, state.r, state.t, nullptr, &h);
  Mat6 jac = Mat6::Zero();
  jac.topRightCorner<3, 3>() = Mat3::Identity();
  jac.bottomLeftCorner<3, 3>() = h;
  return jac;
}

Trajectory propagate(const AsteroidModel& model, const InertialState& state, double t_end,
                     const IntegratorOptions& opt) {
  check_state(state);
  if (t_end < state.t) throw Error("propagate: t_end must not precede the state epoch");

  auto rhs = [&model](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Vec3 r = y.head<3>();
    Vec3 a;
    gravity_eval(model, r, t, &a, nullptr);
    dy.head<3>() = y.segment<3>(3);
    dy.segment<3>(3) = a;
  };

  IntegrationResult res = integrate_dense(rhs, state.t, state.vec(), t_end, opt);
  if (!res.ok())
    throw PropagationError("propagation failed (step underflow near singularity)", res.t_reached);
  return Trajectory{std::move(res.dense)};
}

StmTrajectory propagate_with_stm(const AsteroidModel& model, const InertialState& state,
                                 double t_end, const IntegratorOptions& opt) {
  check_state(state);
  if (t_end < state.t) throw Error("propagate_with_stm: t_end must not precede the state epoch");

  auto rhs = [&model](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Vec3 r = y.head<3>();
    Vec3 a;
    Mat3 h;
    gravity_eval(model, r, t, &a, &h);
    dy.head<3>() = y.segment<3>(3);
    dy.segment<3>(3) = a;
    Eigen::Map<const Mat6> phi(y.data() + 6);
    Eigen::Map<Mat6> dphi(dy.data() + 6);
    dphi.topRows<3>() = phi.bottomRows<3>();
    dphi.bottomRows<3>() = h * phi.topRows<3>();
  };

  Eigen::VectorXd y0(42);
  y0.head<6>() = state.vec();
  Eigen::Map<Mat6>(y0.data() + 6) = Mat6::Identity();

  IntegrationResult res = integrate_dense(rhs, state.t, y0, t_end, opt);
  if (!res.ok())
    throw PropagationError("STM propagation failed (step underflow near singularity)",
                           res.t_reached);
  return StmTrajectory{std::move(res.dense)};
}

}  // namespace reachmap
