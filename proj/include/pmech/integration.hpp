#pragma once

#include <Eigen/Dense>

#include <utility>

#include "pmech/common.hpp"
#include "pmech/rigid_body.hpp"

namespace pmech {

struct StepPlan {
  double dt = 0.0;
  double tEnd = 0.0;
  double outputInterval = 0.0;
};

/// Generic time-dependent state with a right-hand-side contract. Everything
/// that is not a rigid body (shear forces, growing radii, ...) is integrated
/// through this interface.
class StateObject {
 public:
  virtual ~StateObject() = default;
  virtual Eigen::VectorXd state() const = 0;
  virtual void setState(const Eigen::VectorXd& s) = 0;
  virtual Eigen::VectorXd rhs(const Eigen::VectorXd& s, double t) const = 0;
  virtual void postStep(double /*t*/) {}
};

/// Midpoint second-order Runge-Kutta:
///   s* = s + dt/2 * f(s, t);  s' = s + dt * f(s*, t + dt/2).
inline void rk2Step(StateObject& obj, double t, double dt) {
  const Eigen::VectorXd s = obj.state();
  const Eigen::VectorXd mid = s + 0.5 * dt * obj.rhs(s, t);
  obj.setState(s + dt * obj.rhs(mid, t + 0.5 * dt));
}

/// Second-order orientation update built from omega and its rate, then
/// renormalized (the raw increment is not norm-preserving).
inline Eigen::Quaterniond integrateOrientation(const Eigen::Quaterniond& q, const Vec3& omega,
                                               const Vec3& omegaDot, double dt) {
  // q maps global -> reference; evolve the body rotation r = q* and invert back
  const Eigen::Quaterniond r = q.conjugate();
  const Vec3 w = omega + 0.5 * dt * omegaDot;
  const Eigen::Quaterniond wr = Eigen::Quaterniond(0.0, w.x(), w.y(), w.z()) * r;
  Eigen::Quaterniond rNew(r.w() + 0.5 * dt * wr.w(), r.x() + 0.5 * dt * wr.x(),
                          r.y() + 0.5 * dt * wr.y(), r.z() + 0.5 * dt * wr.z());
  rNew.normalize();
  return rNew.conjugate();
}

inline void advancePose(Pose<2>& pose, const Vec2& v, double omega, const Vec2& vdot,
                        double omegaDot, double dt) {
  pose.center += v * dt + 0.5 * dt * dt * vdot;
  pose.orientation += omega * dt + 0.5 * dt * dt * omegaDot;
}

inline void advancePose(Pose<3>& pose, const Vec3& v, const Vec3& omega, const Vec3& vdot,
                        const Vec3& omegaDot, double dt) {
  pose.center += v * dt + 0.5 * dt * dt * vdot;
  pose.orientation = integrateOrientation(pose.orientation, omega, omegaDot, dt);
}

/// One velocity-Verlet step of a single body. The provider computes current
/// accelerations (re-evaluating forces) and is called at the start and the end
/// of the step for the two half velocity kicks. Fixed bodies translate at
/// their prescribed velocity.
template <int D, class AccelProvider>
void verletStep(RigidBody<D>& body, double dt, AccelProvider&& accel) {
  if (body.fixed()) {
    body.pose().center += body.velocity() * dt;
    return;
  }
  const auto [a0, alpha0] = accel(body);
  advancePose(body.pose(), body.velocity(), body.angularVelocity(), a0, alpha0, dt);
  body.velocity() += 0.5 * dt * a0;
  body.angularVelocity() += 0.5 * dt * alpha0;
  const auto [a1, alpha1] = accel(body);
  body.velocity() += 0.5 * dt * a1;
  body.angularVelocity() += 0.5 * dt * alpha1;
}

}  // namespace pmech
