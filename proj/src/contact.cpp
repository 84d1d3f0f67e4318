#include "pmech/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pmech {

namespace {

constexpr int kMaxIterations = 200;

// rotate a global direction into the particle reference frame
inline Vec3 directionToReference(const Pose<3>& pose, const Vec3& d) { return pose.orientation * d; }
inline Vec2 directionToReference(const Pose<2>& pose, const Vec2& d) {
  const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
  return Vec2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
}

// Boundary point extremal in direction `dir` (reference frame). Ties between
// equally extremal vertices are averaged so face/edge contacts land on the
// feature center. Returns false for shapes without a support rule.
template <int D>
bool supportPoint(const Shape<D>& shape, const Vec<D>& dir, Vec<D>& out) {
  if (const auto* sphere = dynamic_cast<const SphereShape<D>*>(&shape)) {
    out = sphere->radius() * dir.normalized();
    return true;
  }
  if (const auto* box = dynamic_cast<const BoxShape<D>*>(&shape)) {
    const double eps = 1e-10 * dir.norm();
    for (int i = 0; i < D; ++i) {
      const double half = 0.5 * box->extents()[i];
      out[i] = dir[i] > eps ? half : (dir[i] < -eps ? -half : 0.0);
    }
    return true;
  }
  const std::vector<Vec<D>>* verts = nullptr;
  if constexpr (D == 2) {
    if (const auto* poly = dynamic_cast<const ConvexPolygonShape*>(&shape)) verts = &poly->vertices();
  } else {
    if (const auto* poly = dynamic_cast<const ConvexPolyhedronShape*>(&shape)) verts = &poly->vertices();
  }
  if (verts) {
    double best = -infinity();
    for (const auto& v : *verts) best = std::max(best, v.dot(dir));
    const double tol = 1e-10 * dir.norm() * shape.boundingRadius();
    Vec<D> sum = Vec<D>::Zero();
    int count = 0;
    for (const auto& v : *verts) {
      if (v.dot(dir) >= best - tol) {
        sum += v;
        ++count;
      }
    }
    out = sum / count;
    return true;
  }
  return false;
}

template <int D>
ContactSummary<D> sphereSphere(const RigidBody<D>& home, const RigidBody<D>& neighbor) {
  const auto& sh = static_cast<const SphereShape<D>&>(*home.shape());
  const auto& sn = static_cast<const SphereShape<D>&>(*neighbor.shape());
  ContactSummary<D> s;
  Vec<D> d = neighbor.pose().center - home.pose().center;
  const double dist = d.norm();
  const Vec<D> u = dist > 1e-14 ? Vec<D>(d / dist) : Vec<D>::Unit(0);
  s.x1 = home.pose().center + sh.radius() * u;
  s.x2 = neighbor.pose().center - sn.radius() * u;
  s.bond = s.x2 - s.x1;
  s.penetrating = dist < sh.radius() + sn.radius();
  s.depth = s.penetrating ? s.bond.norm() : 0.0;
  return s;
}

// wall described in global coordinates: inward unit normal and a plane point
template <int D>
struct WorldPlane {
  Vec<D> normal;
  Vec<D> point;
};

template <int D>
WorldPlane<D> worldPlane(const RigidBody<D>& wall) {
  const auto& hs = static_cast<const HalfSpaceShape<D>&>(*wall.shape());
  WorldPlane<D> p;
  p.normal = directionFromReference(wall.pose(), hs.normal());
  p.point = fromReference(wall.pose(), Vec<D>(hs.offset() * hs.normal()));
  return p;
}

// bounded body against a half-space wall; x1 on the body, x2 on the plane
template <int D>
bool boundedVsWall(const RigidBody<D>& body, const RigidBody<D>& wall, ContactSummary<D>& s) {
  const auto plane = worldPlane(wall);
  const Vec<D> refDir = directionToReference(body.pose(), plane.normal);
  Vec<D> sup;
  if (!supportPoint<D>(*body.shape(), refDir, sup)) return false;
  s.x1 = fromReference(body.pose(), sup);
  s.x2 = s.x1 + (plane.point - s.x1).dot(plane.normal) * plane.normal;
  s.bond = s.x2 - s.x1;
  s.penetrating = wall.worldSdf(s.x1) < 0.0 && body.worldSdf(s.x2) < 0.0;
  s.depth = s.penetrating ? s.bond.norm() : 0.0;
  return true;
}

template <int D>
void mirror(ContactSummary<D>& s) {
  std::swap(s.x1, s.x2);
  s.bond = -s.bond;
}

// Projected tangential descent for the general convex-convex case: each
// iteration minimizes the neighbor SDF along the home boundary's tangent
// directions (coarse scan + golden-section refinement, staying on the boundary
// via projection), and symmetrically for x2. A warm start near the optimum
// finds no improving move and converges immediately.
template <int D>
ContactSummary<D> iterativeSolve(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                                 const WarmStart<D>& warm) {
  const double brHome = home.shape()->boundingRadius();
  const double brNbr = neighbor.shape()->boundingRadius();
  const double minBr = std::min(brHome, brNbr);
  const double tol = 1e-8 * minBr;
  const double halfWidth = 0.6 * minBr;
  const double improveMargin = 1e-12 * minBr;

  // Cold starts scan the whole boundary and descend from the few deepest,
  // well-separated candidates so both chains (and the mirrored home/neighbor
  // call) settle on the global optimum, not a nearby local one.
  auto seedCandidates = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective) {
    const double br = onBoundaryOf.shape()->boundingRadius();
    const Vec<D> c = onBoundaryOf.pose().center;
    std::vector<std::pair<double, Vec<D>>> scan;
    auto consider = [&](const Vec<D>& p) { scan.emplace_back(objective.worldSdf(p), p); };
    consider(onBoundaryOf.worldProjectToBoundary(objective.pose().center));
    if constexpr (D == 2) {
      constexpr int kDirs = 64;
      for (int i = 0; i < kDirs; ++i) {
        const double a = 2.0 * std::numbers::pi * i / kDirs;
        consider(onBoundaryOf.worldProjectToBoundary(
            Vec2(c + br * Vec2(std::cos(a), std::sin(a)))));
      }
    } else {
      constexpr int kDirs = 128;  // spherical Fibonacci lattice
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < kDirs; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / kDirs;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * i;
        consider(onBoundaryOf.worldProjectToBoundary(
            Vec3(c + br * Vec3(r * std::cos(a), r * std::sin(a), z))));
      }
    }
    std::sort(scan.begin(), scan.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    std::vector<Vec<D>> seeds;
    for (const auto& [f, p] : scan) {
      const bool close = std::any_of(seeds.begin(), seeds.end(),
                                     [&](const Vec<D>& q) { return (q - p).norm() < 0.3 * br; });
      if (!close) seeds.push_back(p);
      if (seeds.size() == 5) break;
    }
    return seeds;
  };

  // minimize f(t) = objective sdf of (x + t u projected onto the home
  // boundary); returns the projected minimizer, or x if nothing improves
  auto lineMin = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective,
                     const Vec<D>& x, const Vec<D>& u) {
    auto point = [&](double t) { return onBoundaryOf.worldProjectToBoundary(Vec<D>(x + t * u)); };
    auto f = [&](double t) { return objective.worldSdf(point(t)); };
    const double f0 = f(0.0);
    constexpr int kCoarse = 8;
    double bestT = 0.0, bestF = f0;
    for (int i = -kCoarse; i <= kCoarse; ++i) {
      if (i == 0) continue;
      const double t = halfWidth * i / kCoarse;
      const double ft = f(t);
      if (ft < bestF) {
        bestF = ft;
        bestT = t;
      }
    }
    double lo = bestT - halfWidth / kCoarse, hi = bestT + halfWidth / kCoarse;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > 0.25 * tol) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = f(d);
      }
    }
    const double t = 0.5 * (lo + hi);
    if (std::min({f(t), fc, fd, bestF}) >= f0 - improveMargin) return x;
    double tBest = bestT;
    double fBest = bestF;
    if (fc < fBest) { fBest = fc; tBest = c; }
    if (fd < fBest) { fBest = fd; tBest = d; }
    if (f(t) < fBest) tBest = t;
    return point(tBest);
  };

  // At a boundary kink (polygon vertex, box edge) the finite-difference
  // gradient blends the adjacent face normals, so the tangent line can miss
  // the descending face entirely. A shrinking ring of projected probes around
  // x recovers a descent point in that case; near a true optimum no probe
  // improves and the point stays put.
  auto ringSearch = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective,
                        const Vec<D>& x) {
    const double f0 = objective.worldSdf(x);
    auto probe = [&](double h, const Vec<D>& dir, Vec<D>& best, double& fBest) {
      const Vec<D> p = onBoundaryOf.worldProjectToBoundary(Vec<D>(x + h * dir));
      const double fp = objective.worldSdf(p);
      if (fp < fBest) {
        fBest = fp;
        best = p;
      }
    };
    for (double h = halfWidth / 8.0; h > tol; h /= 8.0) {
      Vec<D> best = x;
      double fBest = f0 - improveMargin;
      if constexpr (D == 2) {
        for (int i = 0; i < 16; ++i) {
          const double a = 2.0 * std::numbers::pi * i / 16;
          probe(h, Vec2(std::cos(a), std::sin(a)), best, fBest);
        }
      } else {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < 32; ++i) {
          const double z = 1.0 - 2.0 * (i + 0.5) / 32;
          const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          probe(h, Vec3(r * std::cos(golden * i), r * std::sin(golden * i), z), best, fBest);
        }
      }
      if (fBest < f0 - improveMargin) return best;
    }
    return x;
  };

  // Nonsmooth features create narrow descent valleys that the tangent-basis
  // sweep and fixed ring directions both miss: a kink in the home boundary
  // (valley along the edge where two faces meet) or a kink in the objective
  // SDF (valley where its nearest feature switches). Estimate both kinds of
  // valley direction from gradients at probes just off x and line-search
  // along them. In 2-D the boundary is one-dimensional, so the single
  // tangent line already covers every direction.
  auto kinkSearch = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective,
                        const Vec<D>& x) {
    const double h = 1e-4 * minBr;
    std::vector<Vec<D>> normals, objGrads;
    auto addUnique = [](std::vector<Vec<D>>& set, Vec<D> g) {
      const double gn = g.norm();
      if (gn < 1e-12) return;
      g /= gn;
      for (const auto& m : set)
        if (m.dot(g) > 1.0 - 1e-9) return;
      set.push_back(g);
    };
    auto probe = [&](const Vec<D>& dir) {
      const Vec<D> p = onBoundaryOf.worldProjectToBoundary(Vec<D>(x + h * dir));
      addUnique(normals, onBoundaryOf.worldSdfGradient(p));
      addUnique(objGrads, objective.worldSdfGradient(p));
    };
    if constexpr (D == 2) {
      for (int i = 0; i < 8; ++i) {
        const double a = 2.0 * std::numbers::pi * i / 8;
        probe(Vec2(std::cos(a), std::sin(a)));
      }
      for (const auto& n : normals) {
        const Vec<D> moved = lineMin(onBoundaryOf, objective, x, Vec2(-n.y(), n.x()));
        if ((moved - x).norm() >= tol) return moved;
      }
    } else {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < 16; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / 16;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        probe(Vec3(r * std::cos(golden * i), r * std::sin(golden * i), z));
      }
      std::vector<Vec3> valleys;
      // boundary edge: intersection of adjacent face normals
      for (size_t i = 0; i < normals.size(); ++i)
        for (size_t j = i + 1; j < normals.size(); ++j)
          valleys.push_back(normals[i].cross(normals[j]));
      // objective kink: within the tangent plane, perpendicular to the
      // gradient jump across the valley
      const Vec3 n0 = normals.empty() ? Vec3(Vec3::Zero()) : normals.front();
      for (size_t i = 0; i < objGrads.size(); ++i)
        for (size_t j = i + 1; j < objGrads.size(); ++j)
          valleys.push_back(n0.cross(Vec3(objGrads[i] - objGrads[j])));
      for (Vec3& dir : valleys) {
        const double len = dir.norm();
        if (len < 1e-6) continue;
        const Vec<D> moved = lineMin(onBoundaryOf, objective, x, Vec3(dir / len));
        if ((moved - x).norm() >= tol) return moved;
      }
    }
    return x;
  };

  // One full descent pass: sweep the tangent basis of the supporting boundary
  // at x, falling back to the valley and ring searches when the sweep stalls,
  // and repeat until the point stops moving. Completing the descent within a
  // single pass keeps warm starts at the documented 1-2 iterations even when
  // the minimum sits in a diagonal valley.
  auto improve = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective, Vec<D> x) {
    for (int pass = 0; pass < 100; ++pass) {
      Vec<D> n = onBoundaryOf.worldSdfGradient(x);
      const double nn = n.norm();
      if (nn < 1e-12) return x;
      n /= nn;
      Vec<D> moved = x;
      if constexpr (D == 2) {
        moved = lineMin(onBoundaryOf, objective, x, Vec2(-n.y(), n.x()));
      } else {
        const Vec3 seed = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
        const Vec3 u = n.cross(seed).normalized();
        const Vec3 v = n.cross(u);
        moved = lineMin(onBoundaryOf, objective, x, u);
        moved = lineMin(onBoundaryOf, objective, moved, v);
      }
      if ((moved - x).norm() < tol) moved = kinkSearch(onBoundaryOf, objective, x);
      if ((moved - x).norm() < tol) moved = ringSearch(onBoundaryOf, objective, x);
      if ((moved - x).norm() < tol) return moved;
      x = moved;
    }
    return x;
  };

  struct Chain {
    Vec<D> x;
    int iterations = 0;
    bool converged = false;
  };
  auto solveChain = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective,
                        const Vec<D>& start) {
    Chain r;
    r.x = start;
    for (int it = 1; it <= kMaxIterations; ++it) {
      const Vec<D> xn = improve(onBoundaryOf, objective, r.x);
      const double move = (xn - r.x).norm();
      r.x = xn;
      r.iterations = it;
      if (move < tol) {
        r.converged = true;
        break;
      }
    }
    return r;
  };
  auto solveBest = [&](const RigidBody<D>& onBoundaryOf, const RigidBody<D>& objective) {
    Chain best;
    double fBest = infinity();
    for (const Vec<D>& seed : seedCandidates(onBoundaryOf, objective)) {
      const Chain r = solveChain(onBoundaryOf, objective, seed);
      const double f = objective.worldSdf(r.x);
      const bool better = (r.converged && !best.converged) ||
                          (r.converged == best.converged && f < fBest);
      if (better || fBest == infinity()) {
        fBest = f;
        best = r;
      }
    }
    return best;
  };

  const Chain c1 = warm ? solveChain(home, neighbor, warm->first) : solveBest(home, neighbor);
  const Chain c2 = warm ? solveChain(neighbor, home, warm->second) : solveBest(neighbor, home);
  ContactSummary<D> s;
  s.x1 = c1.x;
  s.x2 = c2.x;
  s.iterations = std::max(c1.iterations, c2.iterations);
  s.converged = c1.converged && c2.converged;
  s.bond = s.x2 - s.x1;
  s.penetrating = s.converged && neighbor.worldSdf(s.x1) < 0.0 && home.worldSdf(s.x2) < 0.0;
  s.depth = s.penetrating ? s.bond.norm() : 0.0;
  return s;
}

}  // namespace

template <int D>
std::pair<Vec<D>, Vec<D>> contactKinematics(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                                            const Vec<D>& x1, const Vec<D>& x2) {
  const Vec<D> xi = x2 - x1;
  const double len = xi.norm();
  if (len < 1e-14) throw DegenerateBond("contact bond is degenerate (coincident points)");
  const Vec<D> vr = home.pointVelocity(x1) - neighbor.pointVelocity(x2);
  const Vec<D> xiHat = xi / len;
  const Vec<D> va = vr - vr.dot(xiHat) * xiHat;
  return {vr, va};
}

template <int D>
void completeSummary(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                     ContactSummary<D>& s) {
  const Vec<D> xi = s.x2 - s.x1;
  const double len = xi.norm();
  if (len >= 1e-14) {
    auto [vr, va] = contactKinematics(home, neighbor, s.x1, s.x2);
    s.relVelocity = vr;
    s.tangentialVelocity = va;
    s.normal = s.penetrating ? Vec<D>(xi / len) : Vec<D>(-xi / len);
  } else {
    // coincident contact points: take the normal from the neighbor's SDF
    s.normal = -neighbor.worldSdfGradient(s.x1);
    const double n = s.normal.norm();
    if (n > 0.0) s.normal /= n;
    const Vec<D> vr = home.pointVelocity(s.x1) - neighbor.pointVelocity(s.x2);
    s.relVelocity = vr;
    s.tangentialVelocity = vr - vr.dot(s.normal) * s.normal;
  }
}

template <int D>
ContactSummary<D> detectContact(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                                const WarmStart<D>& warmStart) {
  const bool homeWall = dynamic_cast<const HalfSpaceShape<D>*>(home.shape().get()) != nullptr;
  const bool nbrWall = dynamic_cast<const HalfSpaceShape<D>*>(neighbor.shape().get()) != nullptr;

  ContactSummary<D> s;
  if (homeWall && nbrWall) {
    completeSummary(home, neighbor, s);
    return s;
  }
  if (dynamic_cast<const SphereShape<D>*>(home.shape().get()) &&
      dynamic_cast<const SphereShape<D>*>(neighbor.shape().get())) {
    s = sphereSphere(home, neighbor);
  } else if (nbrWall && boundedVsWall(home, neighbor, s)) {
    // solved directly
  } else if (homeWall) {
    WarmStart<D> mirrored;
    if (warmStart) mirrored = std::make_pair(warmStart->second, warmStart->first);
    if (boundedVsWall(neighbor, home, s)) {
      mirror(s);
    } else {
      s = iterativeSolve(neighbor, home, mirrored);
      mirror(s);
    }
  } else {
    s = iterativeSolve(home, neighbor, warmStart);
  }
  completeSummary(home, neighbor, s);
  return s;
}

template ContactSummary<2> detectContact<2>(const RigidBody<2>&, const RigidBody<2>&,
                                            const WarmStart<2>&);
template ContactSummary<3> detectContact<3>(const RigidBody<3>&, const RigidBody<3>&,
                                            const WarmStart<3>&);
template std::pair<Vec2, Vec2> contactKinematics<2>(const RigidBody<2>&, const RigidBody<2>&,
                                                    const Vec2&, const Vec2&);
template std::pair<Vec3, Vec3> contactKinematics<3>(const RigidBody<3>&, const RigidBody<3>&,
                                                    const Vec3&, const Vec3&);
template void completeSummary<2>(const RigidBody<2>&, const RigidBody<2>&, ContactSummary<2>&);
template void completeSummary<3>(const RigidBody<3>&, const RigidBody<3>&, ContactSummary<3>&);

}  // namespace pmech
