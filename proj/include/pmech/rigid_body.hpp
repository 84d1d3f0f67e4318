#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "pmech/common.hpp"
#include "pmech/geometry.hpp"

namespace pmech {

// ---- quaternion algebra ------------------------------------------------------

inline Eigen::Quaterniond quaternionFromAxisAngle(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) throw NonUnitAxis("rotation axis must be unit length");
  const double half = 0.5 * angle;
  const Vec3 v = std::sin(half) * axis;
  return Eigen::Quaterniond(std::cos(half), v.x(), v.y(), v.z());
}

inline Vec3 rotate(const Eigen::Quaterniond& q, const Vec3& x) { return q * x; }

// ---- pose and frame transforms -------------------------------------------------

template <int D>
struct Pose {
  Vec<D> center = Vec<D>::Zero();
  Orientation<D> orientation = Kinematics<D>::identity();
};

/// Global point -> particle reference frame. In 3-D: X = q (x - center); the
/// orientation quaternion rotates the global frame onto the reference frame.
inline Vec3 toReference(const Pose<3>& pose, const Vec3& x) {
  return pose.orientation * (x - pose.center);
}
inline Vec3 fromReference(const Pose<3>& pose, const Vec3& X) {
  return pose.orientation.conjugate() * X + pose.center;
}

inline Vec2 toReference(const Pose<2>& pose, const Vec2& x) {
  const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
  const Vec2 d = x - pose.center;
  return Vec2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());  // rotate by -theta
}
inline Vec2 fromReference(const Pose<2>& pose, const Vec2& X) {
  const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
  return pose.center + Vec2(c * X.x() - s * X.y(), s * X.x() + c * X.y());
}

// rotate a reference-frame direction into the global frame (no translation)
inline Vec3 directionFromReference(const Pose<3>& pose, const Vec3& N) {
  return pose.orientation.conjugate() * N;
}
inline Vec2 directionFromReference(const Pose<2>& pose, const Vec2& N) {
  const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
  return Vec2(c * N.x() - s * N.y(), s * N.x() + c * N.y());
}

// ---- rigid body ---------------------------------------------------------------

template <int D>
class RigidBody;

template <int D>
using BodyForce = std::function<std::pair<Vec<D>, AngularVelocity<D>>(const RigidBody<D>&, double)>;

/// Particle (or peridynamic material point) state: pose, velocities, geometry,
/// cached mass properties and per-step load accumulators.
template <int D>
class RigidBody {
 public:
  RigidBody(int id, ShapePtr<D> shape, double density, const Pose<D>& pose)
      : id_(id), shape_(std::move(shape)), density_(density), pose_(pose) {
    const auto mp = shape_->massProperties(density_);
    mass_ = mp.mass;
    inertiaRef_ = mp.inertia;
    volume_ = mp.volume;
    resetLoads();
  }

  /// Fixed/kinematic body (wall or driven plate): prescribed velocity, never
  /// integrated through Newton-Euler.
  static RigidBody fixedBody(int id, ShapePtr<D> shape, const Pose<D>& pose,
                             const Vec<D>& kinematicVelocity = Vec<D>::Zero()) {
    RigidBody b;
    b.id_ = id;
    b.shape_ = std::move(shape);
    b.pose_ = pose;
    b.fixed_ = true;
    b.velocity_ = kinematicVelocity;
    b.resetLoads();
    return b;
  }

  int id() const { return id_; }
  const ShapePtr<D>& shape() const { return shape_; }
  void setShape(ShapePtr<D> shape) { shape_ = std::move(shape); }
  double density() const { return density_; }
  double mass() const { return mass_; }
  const Inertia<D>& referenceInertia() const { return inertiaRef_; }
  double volume() const { return volume_; }
  bool fixed() const { return fixed_; }

  Pose<D>& pose() { return pose_; }
  const Pose<D>& pose() const { return pose_; }
  Vec<D>& velocity() { return velocity_; }
  const Vec<D>& velocity() const { return velocity_; }
  AngularVelocity<D>& angularVelocity() { return angularVelocity_; }
  const AngularVelocity<D>& angularVelocity() const { return angularVelocity_; }

  const Vec<D>& netForce() const { return forceAccum_; }
  const AngularVelocity<D>& netTorque() const { return torqueAccum_; }

  std::vector<BodyForce<D>>& bodyForces() { return bodyForces_; }
  const std::vector<BodyForce<D>>& bodyForces() const { return bodyForces_; }

  void resetLoads() {
    forceAccum_ = Vec<D>::Zero();
    torqueAccum_ = Kinematics<D>::zeroAngular();
  }

  void applyForce(const Vec<D>& f) { forceAccum_ += f; }
  void applyTorque(const AngularVelocity<D>& tau) { torqueAccum_ += tau; }

  /// Apply a pair force at the pair's moment arm point (x1+x2)/2.
  void applyPairLoad(const Vec<D>& force, const Vec<D>& contactPoint) {
    forceAccum_ += force;
    torqueAccum_ += momentOf(Vec<D>(contactPoint - pose_.center), force);
  }

  void accumulateBodyForces(double t) {
    for (const auto& bf : bodyForces_) {
      auto [f, tau] = bf(*this, t);
      forceAccum_ += f;
      torqueAccum_ += tau;
    }
  }

  /// World-frame SDF / gradient / projection through the current pose.
  double worldSdf(const Vec<D>& x) const { return shape_->sdf(toReference(pose_, x)); }
  Vec<D> worldSdfGradient(const Vec<D>& x) const {
    return directionFromReference(pose_, shape_->sdfGradient(toReference(pose_, x)));
  }
  Vec<D> worldProjectToBoundary(const Vec<D>& x) const {
    return fromReference(pose_, shape_->projectToBoundary(toReference(pose_, x)));
  }

  /// Newton-Euler accelerations from the accumulated loads.
  std::pair<Vec<D>, AngularVelocity<D>> computeAccelerations() const {
    if (fixed_) throw FixedBodyError("computeAccelerations called on a fixed body");
    const Vec<D> vdot = forceAccum_ / mass_;
    if constexpr (D == 2) {
      return {vdot, torqueAccum_ / inertiaRef_};
    } else {
      const Eigen::Matrix3d R = pose_.orientation.conjugate().toRotationMatrix();
      const Eigen::Matrix3d I = R * inertiaRef_ * R.transpose();
      const Vec3 gyro = angularVelocity_.cross(I * angularVelocity_);
      const Vec3 wdot = I.ldlt().solve(torqueAccum_ - gyro);
      return {vdot, wdot};
    }
  }

  /// Velocity of the material point of this body currently at global x.
  Vec<D> pointVelocity(const Vec<D>& x) const {
    return velocity_ + angularCross(angularVelocity_, Vec<D>(x - pose_.center));
  }

 private:
  RigidBody() = default;

  int id_ = -1;
  ShapePtr<D> shape_;
  double density_ = 0.0;
  Pose<D> pose_;
  Vec<D> velocity_ = Vec<D>::Zero();
  AngularVelocity<D> angularVelocity_ = Kinematics<D>::zeroAngular();
  double mass_ = 0.0;
  Inertia<D> inertiaRef_ = Kinematics<D>::zeroInertia();
  double volume_ = 0.0;
  Vec<D> forceAccum_ = Vec<D>::Zero();
  AngularVelocity<D> torqueAccum_ = Kinematics<D>::zeroAngular();
  std::vector<BodyForce<D>> bodyForces_;
  bool fixed_ = false;
};

}  // namespace pmech
