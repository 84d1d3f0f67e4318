#pragma once

#include <array>
#include <vector>

#include "pmech/common.hpp"
#include "pmech/simulation.hpp"

namespace pmech {

/// Per-particle state snapshot, always stored with 3-D layout so the CSV
/// schema is dimension-independent (2-D runs embed in the plane z = 0).
struct ParticleRecord {
  double t = 0.0;
  int id = -1;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Vec3 angularVelocity = Vec3::Zero();
};

/// Collection-level homogenized quantities at one observation time.
struct CollectionRecord {
  double t = 0.0;
  double strain = 0.0;
  Eigen::Matrix3d stress = Eigen::Matrix3d::Zero();
  double volume = 0.0;
};

template <int D>
ParticleRecord particleSnapshot(const Simulation<D>& sim, int bodyId, double t);

/// Total pair force on body i exerted by body j.
template <int D>
struct PairForce {
  int i = -1;
  int j = -1;
  Vec<D> force = Vec<D>::Zero();
};

template <int D>
struct StressResult {
  Mat<D> stress = Mat<D>::Zero();
  double volume = 0.0;
};

/// Volume (area in 2-D) of the smallest axis-aligned box containing every
/// bounded particle's bounding sphere; walls and other unbounded shapes are
/// excluded. Throws EmptyCollection when no bounded body exists.
template <int D>
double collectionVolume(const std::vector<RigidBody<D>>& bodies);

/// Homogenized Cauchy stress sigma = (1/V) sum over ordered pairs of
/// d_ij (x) F_ij with d_ij = x_j - x_i the branch vector and F_ij the force
/// on i from j.
template <int D>
StressResult<D> stressFromPairForces(const std::vector<RigidBody<D>>& bodies,
                                     const std::vector<PairForce<D>>& pairs);

template <int D>
StressResult<D> homogenizedCauchyStress(const Simulation<D>& sim);

/// Rank-4 tangent operator, flattened row-major over (a,b,c,d):
///   D = (1/V) sum over contacts of (k_n n(x)d(x)n(x)d + k_t t(x)d(x)t(x)d).
/// Sticking contacts (zero sliding velocity) have no defined tangential
/// direction and contribute no k_t term.
template <int D>
std::vector<double> tangentOperator(const Simulation<D>& sim);

/// Compression strain proxy from a tracked boundary body:
/// (ref - current coordinate along `axis`) / refLength.
template <int D>
double strainProxy(const Simulation<D>& sim, int bodyId, int axis, double refCoord,
                   double refLength);

}  // namespace pmech
