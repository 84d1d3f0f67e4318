#include "pmech/observers.hpp"

#include <cmath>

namespace pmech {

namespace {

template <int D>
const RigidBody<D>& bodyById(const Simulation<D>& sim, int bodyId) {
  for (const auto& b : sim.bodies())
    if (b.id() == bodyId) return b;
  throw UnknownBodyId("no body with id " + std::to_string(bodyId));
}

inline void fillRecord(ParticleRecord& r, const RigidBody<2>& b) {
  r.position.head<2>() = b.pose().center;
  r.velocity.head<2>() = b.velocity();
  // planar rotation about z expressed as a quaternion
  r.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(b.pose().orientation, Vec3::UnitZ()));
  r.angularVelocity.z() = b.angularVelocity();
}

inline void fillRecord(ParticleRecord& r, const RigidBody<3>& b) {
  r.position = b.pose().center;
  r.velocity = b.velocity();
  r.orientation = b.pose().orientation;
  r.angularVelocity = b.angularVelocity();
}

}  // namespace

template <int D>
ParticleRecord particleSnapshot(const Simulation<D>& sim, int bodyId, double t) {
  const RigidBody<D>& b = bodyById(sim, bodyId);
  ParticleRecord r;
  r.t = t;
  r.id = bodyId;
  fillRecord(r, b);
  return r;
}

template <int D>
double collectionVolume(const std::vector<RigidBody<D>>& bodies) {
  Vec<D> lo = Vec<D>::Constant(infinity());
  Vec<D> hi = Vec<D>::Constant(-infinity());
  bool any = false;
  for (const auto& b : bodies) {
    const double r = b.shape()->boundingRadius();
    if (std::isinf(r)) continue;
    lo = lo.cwiseMin(Vec<D>(b.pose().center.array() - r));
    hi = hi.cwiseMax(Vec<D>(b.pose().center.array() + r));
    any = true;
  }
  if (!any) throw EmptyCollection("no bounded bodies in collection");
  return (hi - lo).prod();
}

template <int D>
StressResult<D> stressFromPairForces(const std::vector<RigidBody<D>>& bodies,
                                     const std::vector<PairForce<D>>& pairs) {
  StressResult<D> out;
  out.volume = collectionVolume(bodies);
  for (const auto& p : pairs) {
    const Vec<D> d = bodies[p.j].pose().center - bodies[p.i].pose().center;
    out.stress += d * p.force.transpose();
  }
  out.stress /= out.volume;
  return out;
}

template <int D>
StressResult<D> homogenizedCauchyStress(const Simulation<D>& sim) {
  std::vector<PairForce<D>> pairs;
  pairs.reserve(2 * sim.pairRecords().size());
  for (const auto& rec : sim.pairRecords()) {
    pairs.push_back({rec.i, rec.j, rec.load.force});
    pairs.push_back({rec.j, rec.i, Vec<D>(-rec.load.force)});
  }
  return stressFromPairForces(sim.bodies(), pairs);
}

template <int D>
std::vector<double> tangentOperator(const Simulation<D>& sim) {
  const double volume = collectionVolume(sim.bodies());
  std::vector<double> out(D * D * D * D, 0.0);
  auto accumulate = [&](double k, const Vec<D>& u, const Vec<D>& d) {
    int idx = 0;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c)
          for (int e = 0; e < D; ++e) out[idx++] += k * u[a] * d[b] * u[c] * d[e];
  };
  for (const auto& rec : sim.pairRecords()) {
    const Vec<D> d = sim.bodies()[rec.j].pose().center - sim.bodies()[rec.i].pose().center;
    accumulate(rec.law.elastic.kn, rec.summary.normal, d);
    const double va = rec.summary.tangentialVelocity.norm();
    if (va > 1e-12)
      accumulate(rec.law.elastic.ks, Vec<D>(rec.summary.tangentialVelocity / va), d);
  }
  for (auto& v : out) v /= volume;
  return out;
}

template <int D>
double strainProxy(const Simulation<D>& sim, int bodyId, int axis, double refCoord,
                   double refLength) {
  const RigidBody<D>& b = bodyById(sim, bodyId);
  return (refCoord - b.pose().center[axis]) / refLength;
}

template ParticleRecord particleSnapshot<2>(const Simulation<2>&, int, double);
template ParticleRecord particleSnapshot<3>(const Simulation<3>&, int, double);
template double collectionVolume<2>(const std::vector<RigidBody<2>>&);
template double collectionVolume<3>(const std::vector<RigidBody<3>>&);
template StressResult<2> stressFromPairForces<2>(const std::vector<RigidBody<2>>&,
                                                 const std::vector<PairForce<2>>&);
template StressResult<3> stressFromPairForces<3>(const std::vector<RigidBody<3>>&,
                                                 const std::vector<PairForce<3>>&);
template StressResult<2> homogenizedCauchyStress<2>(const Simulation<2>&);
template StressResult<3> homogenizedCauchyStress<3>(const Simulation<3>&);
template std::vector<double> tangentOperator<2>(const Simulation<2>&);
template std::vector<double> tangentOperator<3>(const Simulation<3>&);
template double strainProxy<2>(const Simulation<2>&, int, int, double, double);
template double strainProxy<3>(const Simulation<3>&, int, int, double, double);

}  // namespace pmech
