#include "pmech/geometry.hpp"

#include <cmath>
#include <numbers>

namespace pmech {

namespace {

// closest point on segment [a, b] to p
template <int D>
Vec<D> closestOnSegment(const Vec<D>& a, const Vec<D>& b, const Vec<D>& p) {
  const Vec<D> ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-300) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

}  // namespace

// ---- ConvexPolygonShape ------------------------------------------------------

ConvexPolygonShape::ConvexPolygonShape(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3) throw DegenerateShape("polygon needs at least 3 vertices");

  // shoelace area; normalize to counter-clockwise
  double twiceArea = 0.0;
  for (int i = 0; i < n; ++i) twiceArea += planarCross(vertices_[i], vertices_[(i + 1) % n]);
  if (std::abs(twiceArea) < 1e-300) throw DegenerateShape("polygon has zero area");
  if (twiceArea < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
    twiceArea = -twiceArea;
  }
  area_ = 0.5 * twiceArea;

  // centroid, then re-center
  Vec2 centroid = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    centroid += planarCross(a, b) * (a + b);
  }
  centroid /= 6.0 * area_;
  for (auto& v : vertices_) v -= centroid;

  double scale = 0.0;
  for (const auto& v : vertices_) scale = std::max(scale, v.norm());
  boundingRadius_ = scale;

  // convexity: every turn non-negative (CCW), within tolerance
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (planarCross(e0, e1) < -1e-10 * scale * scale) throw DegenerateShape("polygon is not convex");
  }

  // polar second moment of area about the centroid
  double iz = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    iz += planarCross(a, b) * (a.squaredNorm() + a.dot(b) + b.squaredNorm());
  }
  secondMoment_ = iz / 12.0;
}

bool ConvexPolygonShape::contains(const Vec2& X) const {
  const int n = static_cast<int>(vertices_.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if (planarCross(b - a, X - a) < 0.0) return false;
  }
  return true;
}

double ConvexPolygonShape::sdf(const Vec2& X) const {
  const int n = static_cast<int>(vertices_.size());
  double best = infinity();
  for (int i = 0; i < n; ++i) {
    const Vec2 c = closestOnSegment(vertices_[i], vertices_[(i + 1) % n], X);
    best = std::min(best, (X - c).norm());
  }
  return contains(X) ? -best : best;
}

Vec2 ConvexPolygonShape::projectToBoundary(const Vec2& X) const {
  const int n = static_cast<int>(vertices_.size());
  double best = infinity();
  Vec2 bestPoint = vertices_[0];
  for (int i = 0; i < n; ++i) {
    const Vec2 c = closestOnSegment(vertices_[i], vertices_[(i + 1) % n], X);
    const double d = (X - c).norm();
    if (d < best) {
      best = d;
      bestPoint = c;
    }
  }
  return bestPoint;
}

Vec2 ConvexPolygonShape::sdfGradient(const Vec2& X) const {
  const Vec2 p = projectToBoundary(X);
  const Vec2 diff = X - p;
  const double d = diff.norm();
  if (d > 1e-12 * boundingRadius_) return contains(X) ? Vec2(-diff / d) : Vec2(diff / d);
  // on the boundary: outward normal of the nearest edge
  const int n = static_cast<int>(vertices_.size());
  double best = infinity();
  Vec2 normal = Vec2::UnitX();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const Vec2 c = closestOnSegment(a, b, X);
    const double dist = (X - c).norm();
    if (dist < best) {
      best = dist;
      const Vec2 e = b - a;
      normal = Vec2(e.y(), -e.x()).normalized();
    }
  }
  return normal;
}

MassProperties<2> ConvexPolygonShape::massProperties(double density) const {
  if (!(area_ > 0.0)) throw DegenerateShape("polygon has non-positive area");
  MassProperties<2> mp;
  mp.volume = area_;
  mp.mass = density * area_;
  mp.inertia = density * secondMoment_;
  return mp;
}

// ---- ConvexPolyhedronShape ---------------------------------------------------

ConvexPolyhedronShape::ConvexPolyhedronShape(std::vector<Vec3> vertices,
                                             std::vector<std::vector<int>> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (vertices_.size() < 4 || faces_.size() < 4)
    throw DegenerateShape("polyhedron needs at least 4 vertices and 4 faces");
  for (const auto& f : faces_) {
    if (f.size() < 3) throw DegenerateShape("polyhedron face needs at least 3 vertices");
    for (int idx : f)
      if (idx < 0 || idx >= static_cast<int>(vertices_.size()))
        throw DegenerateShape("polyhedron face index out of range");
  }

  double volume;
  Vec3 centroid;
  Eigen::Matrix3d secondMoment;
  computeVolumeIntegrals(volume, centroid, secondMoment);
  if (!(volume > 0.0)) throw DegenerateShape("polyhedron volume is not positive");
  for (auto& v : vertices_) v -= centroid;

  double scale = 0.0;
  for (const auto& v : vertices_) scale = std::max(scale, v.norm());
  boundingRadius_ = scale;

  // face normals (Newell) and convexity check
  faceNormals_.resize(faces_.size());
  for (size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    Vec3 n = Vec3::Zero();
    for (size_t k = 0; k < loop.size(); ++k) {
      const Vec3& a = vertices_[loop[k]];
      const Vec3& b = vertices_[loop[(k + 1) % loop.size()]];
      n += a.cross(b);
    }
    const double len = n.norm();
    if (len < 1e-14 * scale * scale) throw DegenerateShape("degenerate polyhedron face");
    faceNormals_[f] = n / len;
    const Vec3& p0 = vertices_[loop[0]];
    if (faceNormals_[f].dot(p0) < 0.0) throw DegenerateShape("polyhedron face normal points inward");
    for (const auto& v : vertices_)
      if ((v - p0).dot(faceNormals_[f]) > 1e-10 * scale)
        throw DegenerateShape("polyhedron is not convex");
  }

  // integrals about the (now centered) origin
  computeVolumeIntegrals(volume_, centroid, secondMoment);
  inertiaPerDensity_ = secondMoment.trace() * Eigen::Matrix3d::Identity() - secondMoment;
}

void ConvexPolyhedronShape::computeVolumeIntegrals(double& volume, Vec3& centroid,
                                                   Eigen::Matrix3d& secondMoment) const {
  // divergence theorem over tetrahedra (origin, a, b, c) fanned from each face
  volume = 0.0;
  centroid = Vec3::Zero();
  secondMoment = Eigen::Matrix3d::Zero();
  for (const auto& loop : faces_) {
    const Vec3& a = vertices_[loop[0]];
    for (size_t k = 1; k + 1 < loop.size(); ++k) {
      const Vec3& b = vertices_[loop[k]];
      const Vec3& c = vertices_[loop[k + 1]];
      const double det = a.dot(b.cross(c));  // 6 * signed tet volume
      const double vol = det / 6.0;
      volume += vol;
      centroid += vol * 0.25 * (a + b + c);
      // for a tetra with one vertex at the origin:
      //   int x_i x_j dV = V/20 * (sum_k p_k,i p_k,j + (sum_k p_k,i)(sum_k p_k,j))
      const Vec3 s = a + b + c;
      Eigen::Matrix3d m = a * a.transpose() + b * b.transpose() + c * c.transpose();
      m += s * s.transpose();
      secondMoment += (vol / 20.0) * m;
    }
  }
  if (std::abs(volume) > 1e-300) centroid /= volume;
}

bool ConvexPolyhedronShape::contains(const Vec3& X) const {
  for (size_t f = 0; f < faces_.size(); ++f)
    if ((X - vertices_[faces_[f][0]]).dot(faceNormals_[f]) > 0.0) return false;
  return true;
}

double ConvexPolyhedronShape::faceDistance(int f, const Vec3& X, Vec3& closest) const {
  const auto& loop = faces_[f];
  const Vec3& n = faceNormals_[f];
  const double h = (X - vertices_[loop[0]]).dot(n);
  const Vec3 proj = X - h * n;
  bool inside = true;
  for (size_t k = 0; k < loop.size(); ++k) {
    const Vec3& a = vertices_[loop[k]];
    const Vec3& b = vertices_[loop[(k + 1) % loop.size()]];
    if ((b - a).cross(proj - a).dot(n) < 0.0) {
      inside = false;
      break;
    }
  }
  if (inside) {
    closest = proj;
    return std::abs(h);
  }
  double best = infinity();
  for (size_t k = 0; k < loop.size(); ++k) {
    const Vec3 c = closestOnSegment(vertices_[loop[k]], vertices_[loop[(k + 1) % loop.size()]], X);
    const double d = (X - c).norm();
    if (d < best) {
      best = d;
      closest = c;
    }
  }
  return best;
}

double ConvexPolyhedronShape::sdf(const Vec3& X) const {
  double best = infinity();
  Vec3 dummy;
  for (size_t f = 0; f < faces_.size(); ++f) best = std::min(best, faceDistance(static_cast<int>(f), X, dummy));
  return contains(X) ? -best : best;
}

Vec3 ConvexPolyhedronShape::projectToBoundary(const Vec3& X) const {
  double best = infinity();
  Vec3 bestPoint = vertices_[0];
  Vec3 c;
  for (size_t f = 0; f < faces_.size(); ++f) {
    const double d = faceDistance(static_cast<int>(f), X, c);
    if (d < best) {
      best = d;
      bestPoint = c;
    }
  }
  return bestPoint;
}

Vec3 ConvexPolyhedronShape::sdfGradient(const Vec3& X) const {
  double best = infinity();
  Vec3 bestPoint = vertices_[0];
  int bestFace = 0;
  Vec3 c;
  for (size_t f = 0; f < faces_.size(); ++f) {
    const double d = faceDistance(static_cast<int>(f), X, c);
    if (d < best) {
      best = d;
      bestPoint = c;
      bestFace = static_cast<int>(f);
    }
  }
  const Vec3 diff = X - bestPoint;
  if (diff.norm() > 1e-12 * boundingRadius_)
    return contains(X) ? Vec3(-diff.normalized()) : Vec3(diff.normalized());
  return faceNormals_[bestFace];
}

MassProperties<3> ConvexPolyhedronShape::massProperties(double density) const {
  MassProperties<3> mp;
  mp.volume = volume_;
  mp.mass = density * volume_;
  mp.inertia = density * inertiaPerDensity_;
  return mp;
}

// ---- helpers ---------------------------------------------------------------

std::shared_ptr<ConvexPolygonShape> makeRegularPolygon(int sides, double circumradius) {
  std::vector<Vec2> verts;
  verts.reserve(sides);
  for (int i = 0; i < sides; ++i) {
    const double ang = 2.0 * std::numbers::pi * i / sides;
    verts.emplace_back(circumradius * std::cos(ang), circumradius * std::sin(ang));
  }
  return std::make_shared<ConvexPolygonShape>(std::move(verts));
}

std::shared_ptr<ConvexPolyhedronShape> makeExtrudedPolygon(const std::vector<Vec2>& polygon,
                                                           double height) {
  // normalize winding via the 2-D shape (also validates convexity)
  ConvexPolygonShape base(polygon);
  const auto& loop = base.vertices();
  const int n = static_cast<int>(loop.size());
  std::vector<Vec3> verts;
  verts.reserve(2 * n);
  for (const auto& v : loop) verts.emplace_back(v.x(), v.y(), -0.5 * height);
  for (const auto& v : loop) verts.emplace_back(v.x(), v.y(), 0.5 * height);

  std::vector<std::vector<int>> faces;
  std::vector<int> bottom(n), top(n);
  for (int i = 0; i < n; ++i) bottom[i] = n - 1 - i;  // reversed so normal points down
  for (int i = 0; i < n; ++i) top[i] = n + i;
  faces.push_back(bottom);
  faces.push_back(top);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    faces.push_back({i, j, n + j, n + i});
  }
  return std::make_shared<ConvexPolyhedronShape>(std::move(verts), std::move(faces));
}

}  // namespace pmech
