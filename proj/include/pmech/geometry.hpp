#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "pmech/common.hpp"

namespace pmech {

template <int D>
struct MassProperties {
  double mass = 0.0;
  Inertia<D> inertia = Kinematics<D>::zeroInertia();
  double volume = 0.0;  // area in 2-D
};

/// Particle geometry expressed as a signed distance function in the particle
/// reference frame (center of mass at the origin). Negative inside, zero on
/// the boundary, positive outside; |sdf| is the distance to the boundary.
template <int D>
class Shape {
 public:
  virtual ~Shape() = default;

  virtual double sdf(const Vec<D>& X) const = 0;
  virtual double boundingRadius() const = 0;
  virtual MassProperties<D> massProperties(double density) const = 0;

  /// Unit outward gradient of the SDF. Default: central finite differences
  /// with step 1e-6 * boundingRadius. At corners any subgradient is fine.
  virtual Vec<D> sdfGradient(const Vec<D>& X) const {
    const double h = 1e-6 * boundingRadius();
    Vec<D> g;
    for (int i = 0; i < D; ++i) {
      Vec<D> a = X, b = X;
      a[i] += h;
      b[i] -= h;
      g[i] = (sdf(a) - sdf(b)) / (2.0 * h);
    }
    const double n = g.norm();
    return n > 0.0 ? Vec<D>(g / n) : g;
  }

  /// Nearest point on the zero level set. Default: gradient descent
  /// X <- X - sdf(X) * grad(X), which converges for convex bodies.
  virtual Vec<D> projectToBoundary(const Vec<D>& X) const {
    const double tol = 1e-8 * boundingRadius();
    Vec<D> p = X;
    for (int it = 0; it < 100; ++it) {
      const double d = sdf(p);
      if (std::abs(d) <= tol) return p;
      p -= d * sdfGradient(p);
    }
    if (std::abs(sdf(p)) <= tol) return p;
    throw ProjectionDiverged("projectToBoundary: no convergence after 100 iterations");
  }
};

template <int D>
using ShapePtr = std::shared_ptr<const Shape<D>>;

// ---- sphere -----------------------------------------------------------------

template <int D>
class SphereShape final : public Shape<D> {
 public:
  explicit SphereShape(double radius) : radius_(radius) {
    if (!(radius > 0.0)) throw DegenerateShape("sphere radius must be positive");
  }

  double radius() const { return radius_; }

  double sdf(const Vec<D>& X) const override { return X.norm() - radius_; }
  double boundingRadius() const override { return radius_; }

  Vec<D> sdfGradient(const Vec<D>& X) const override {
    const double n = X.norm();
    if (n < 1e-300) return Vec<D>::Unit(0);
    return X / n;
  }

  Vec<D> projectToBoundary(const Vec<D>& X) const override {
    const double n = X.norm();
    if (n < 1e-300) return radius_ * Vec<D>::Unit(0);
    return (radius_ / n) * X;
  }

  MassProperties<D> massProperties(double density) const override {
    MassProperties<D> mp;
    if constexpr (D == 2) {
      mp.volume = std::numbers::pi * radius_ * radius_;
      mp.mass = density * mp.volume;
      mp.inertia = 0.5 * mp.mass * radius_ * radius_;
    } else {
      mp.volume = 4.0 / 3.0 * std::numbers::pi * radius_ * radius_ * radius_;
      mp.mass = density * mp.volume;
      mp.inertia = (0.4 * mp.mass * radius_ * radius_) * Eigen::Matrix3d::Identity();
    }
    return mp;
  }

 private:
  double radius_;
};

// ---- box --------------------------------------------------------------------

template <int D>
class BoxShape final : public Shape<D> {
 public:
  explicit BoxShape(const Vec<D>& extents) : extents_(extents) {
    for (int i = 0; i < D; ++i)
      if (!(extents_[i] > 0.0)) throw DegenerateShape("box extents must be positive");
  }

  const Vec<D>& extents() const { return extents_; }

  // Exact box SDF: with q_i = |X_i| - Y_i/2,
  //   sdf = || max(q, 0) || + min(max_i q_i, 0)
  double sdf(const Vec<D>& X) const override {
    Vec<D> q;
    double maxq = -infinity();
    for (int i = 0; i < D; ++i) {
      q[i] = std::abs(X[i]) - 0.5 * extents_[i];
      maxq = std::max(maxq, q[i]);
    }
    Vec<D> qpos = q.cwiseMax(0.0);
    return qpos.norm() + std::min(maxq, 0.0);
  }

  double boundingRadius() const override { return 0.5 * extents_.norm(); }

  Vec<D> sdfGradient(const Vec<D>& X) const override {
    Vec<D> q;
    for (int i = 0; i < D; ++i) q[i] = std::abs(X[i]) - 0.5 * extents_[i];
    Vec<D> qpos = q.cwiseMax(0.0);
    const double outer = qpos.norm();
    Vec<D> g = Vec<D>::Zero();
    if (outer > 1e-300) {
      for (int i = 0; i < D; ++i) g[i] = (X[i] < 0.0 ? -qpos[i] : qpos[i]) / outer;
      return g;
    }
    // inside: push along the axis of the least-deep face
    int axis = 0;
    for (int i = 1; i < D; ++i)
      if (q[i] > q[axis]) axis = i;
    g[axis] = X[axis] < 0.0 ? -1.0 : 1.0;
    return g;
  }

  Vec<D> projectToBoundary(const Vec<D>& X) const override {
    Vec<D> half = 0.5 * extents_;
    Vec<D> clamped = X.cwiseMin(half).cwiseMax(-half);
    if ((clamped - X).norm() > 0.0) return clamped;  // outside: clamp is exact
    // inside: move to the nearest face
    int axis = 0;
    double best = infinity();
    for (int i = 0; i < D; ++i) {
      const double gap = half[i] - std::abs(X[i]);
      if (gap < best) {
        best = gap;
        axis = i;
      }
    }
    Vec<D> p = X;
    p[axis] = X[axis] < 0.0 ? -half[axis] : half[axis];
    return p;
  }

  MassProperties<D> massProperties(double density) const override {
    MassProperties<D> mp;
    mp.volume = extents_.prod();
    mp.mass = density * mp.volume;
    if constexpr (D == 2) {
      mp.inertia = mp.mass / 12.0 * (extents_[0] * extents_[0] + extents_[1] * extents_[1]);
    } else {
      Eigen::Vector3d d;
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        d[i] = mp.mass / 12.0 * (extents_[j] * extents_[j] + extents_[k] * extents_[k]);
      }
      mp.inertia = d.asDiagonal();
    }
    return mp;
  }

 private:
  Vec<D> extents_;
};

// ---- half space (fixed walls) -------------------------------------------------

/// Planar wall: sdf(X) = -(X . n - offset), negative on the material side.
/// Unbounded; usable only for fixed bodies.
template <int D>
class HalfSpaceShape final : public Shape<D> {
 public:
  HalfSpaceShape(const Vec<D>& normal, double offset) : normal_(normal), offset_(offset) {
    const double n = normal_.norm();
    if (std::abs(n - 1.0) > 1e-9) throw DegenerateShape("half-space normal must be unit");
    normal_ /= n;
  }

  const Vec<D>& normal() const { return normal_; }
  double offset() const { return offset_; }

  double sdf(const Vec<D>& X) const override { return -(X.dot(normal_) - offset_); }
  double boundingRadius() const override { return infinity(); }

  Vec<D> sdfGradient(const Vec<D>& /*X*/) const override { return -normal_; }

  Vec<D> projectToBoundary(const Vec<D>& X) const override {
    return X + (offset_ - X.dot(normal_)) * normal_;
  }

  MassProperties<D> massProperties(double /*density*/) const override {
    throw DegenerateShape("half-space has no finite mass properties");
  }

 private:
  Vec<D> normal_;
  double offset_;
};

// ---- convex polygon (2-D) -----------------------------------------------------

/// Convex polygon given as an ordered vertex loop. Vertices are re-centered on
/// the area centroid so the reference origin is the center of mass.
class ConvexPolygonShape final : public Shape<2> {
 public:
  explicit ConvexPolygonShape(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }

  double sdf(const Vec2& X) const override;
  double boundingRadius() const override { return boundingRadius_; }
  Vec2 sdfGradient(const Vec2& X) const override;
  Vec2 projectToBoundary(const Vec2& X) const override;
  MassProperties<2> massProperties(double density) const override;

 private:
  bool contains(const Vec2& X) const;

  std::vector<Vec2> vertices_;  // counter-clockwise
  double boundingRadius_ = 0.0;
  double area_ = 0.0;
  double secondMoment_ = 0.0;  // polar second moment of area about centroid
};

// ---- convex polyhedron (3-D) ----------------------------------------------------

/// Convex polyhedron given as planar faces (vertex loops, counter-clockwise
/// viewed from outside). Vertices are re-centered on the volume centroid.
class ConvexPolyhedronShape final : public Shape<3> {
 public:
  ConvexPolyhedronShape(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& faces() const { return faces_; }

  double sdf(const Vec3& X) const override;
  double boundingRadius() const override { return boundingRadius_; }
  Vec3 sdfGradient(const Vec3& X) const override;
  Vec3 projectToBoundary(const Vec3& X) const override;
  MassProperties<3> massProperties(double density) const override;

 private:
  // distance from X to face f and the closest point on that face
  double faceDistance(int f, const Vec3& X, Vec3& closest) const;
  bool contains(const Vec3& X) const;
  void computeVolumeIntegrals(double& volume, Vec3& centroid, Eigen::Matrix3d& secondMoment) const;

  std::vector<Vec3> vertices_;
  std::vector<std::vector<int>> faces_;
  std::vector<Vec3> faceNormals_;  // outward unit normals
  double boundingRadius_ = 0.0;
  double volume_ = 0.0;
  Eigen::Matrix3d inertiaPerDensity_ = Eigen::Matrix3d::Zero();
};

// ---- helpers --------------------------------------------------------------------

std::shared_ptr<ConvexPolygonShape> makeRegularPolygon(int sides, double circumradius);

/// Prism obtained by extruding a convex polygon along z over [-height/2, height/2].
std::shared_ptr<ConvexPolyhedronShape> makeExtrudedPolygon(const std::vector<Vec2>& polygon,
                                                           double height);

}  // namespace pmech
