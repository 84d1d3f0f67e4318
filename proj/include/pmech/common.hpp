#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <limits>
#include <stdexcept>
#include <string>

namespace pmech {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int D>
using Mat = Eigen::Matrix<double, D, D>;

/// Dimension-dependent kinematic types: in 2-D orientation is a plane angle
/// and angular quantities are scalars; in 3-D they are quaternions/vectors.
template <int D>
struct Kinematics;

template <>
struct Kinematics<2> {
  using Orientation = double;      // angle theta (radians)
  using AngularVelocity = double;  // scalar omega
  using Inertia = double;          // scalar moment of inertia

  static Orientation identity() { return 0.0; }
  static AngularVelocity zeroAngular() { return 0.0; }
  static Inertia zeroInertia() { return 0.0; }
};

template <>
struct Kinematics<3> {
  using Orientation = Eigen::Quaterniond;
  using AngularVelocity = Vec3;
  using Inertia = Eigen::Matrix3d;

  static Orientation identity() { return Eigen::Quaterniond::Identity(); }
  static AngularVelocity zeroAngular() { return Vec3::Zero(); }
  static Inertia zeroInertia() { return Eigen::Matrix3d::Zero(); }
};

template <int D>
using Orientation = typename Kinematics<D>::Orientation;
template <int D>
using AngularVelocity = typename Kinematics<D>::AngularVelocity;
template <int D>
using Inertia = typename Kinematics<D>::Inertia;

// Planar cross products: omega z-hat x r and the scalar (z) component of a x b.
inline Vec2 angularCross(double omega, const Vec2& r) { return Vec2(-omega * r.y(), omega * r.x()); }
inline Vec3 angularCross(const Vec3& omega, const Vec3& r) { return omega.cross(r); }

inline double planarCross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// torque contribution r x F, scalar in 2-D
inline double momentOf(const Vec2& r, const Vec2& f) { return planarCross(r, f); }
inline Vec3 momentOf(const Vec3& r, const Vec3& f) { return r.cross(f); }

inline double infinity() { return std::numeric_limits<double>::infinity(); }

// ---- error types -----------------------------------------------------------

struct ProjectionDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateShape : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonUnitAxis : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FixedBodyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateBond : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IsolatedPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDeformedBond : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownBodyId : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyCollection : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pmech
