#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "pmech/common.hpp"
#include "pmech/geometry.hpp"
#include "pmech/rigid_body.hpp"

namespace pmech {

/// Result of contact detection between a home body and a neighbor:
/// x1 on the home boundary, x2 on the neighbor boundary, bond = x2 - x1.
template <int D>
struct ContactSummary {
  Vec<D> x1 = Vec<D>::Zero();
  Vec<D> x2 = Vec<D>::Zero();
  Vec<D> bond = Vec<D>::Zero();
  bool penetrating = false;
  double depth = 0.0;  // ||bond|| when penetrating
  Vec<D> relVelocity = Vec<D>::Zero();
  Vec<D> tangentialVelocity = Vec<D>::Zero();
  Vec<D> normal = Vec<D>::Zero();  // unit, from neighbor toward home
  bool converged = true;
  int iterations = 0;
};

struct ElasticContactParams {
  double kn = 0.0;  // normal stiffness
  double ks = 0.0;  // shear stiffness
  double mu = 0.0;  // friction coefficient
};

struct ViscoelasticContactParams {
  ElasticContactParams elastic;
  double gammaN = 0.0;
  double gammaS = 0.0;
};

template <int D>
using WarmStart = std::optional<std::pair<Vec<D>, Vec<D>>>;

/// Solve for the contact points (x1, x2): x1 minimizes the neighbor's SDF over
/// the home boundary and x2 symmetrically. Analytic for sphere-sphere and
/// shape-half-space pairs; projected SDF descent otherwise. A stalled solve
/// (200 iterations without convergence) returns converged = false and is
/// treated as no contact by the caller.
template <int D>
ContactSummary<D> detectContact(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                                const WarmStart<D>& warmStart = std::nullopt);

/// Relative and tangential velocity at the contact (Coulomb/dashpot inputs).
/// Throws DegenerateBond when ||x2 - x1|| < 1e-14; the caller then falls back
/// to the SDF gradient normal.
template <int D>
std::pair<Vec<D>, Vec<D>> contactKinematics(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                                            const Vec<D>& x1, const Vec<D>& x2);

/// Fill kinematics and the contact normal of a solved summary.
template <int D>
void completeSummary(const RigidBody<D>& home, const RigidBody<D>& neighbor,
                     ContactSummary<D>& summary);

/// Linear elastic normal force on the home body: zero unless penetrating,
/// magnitude kn * depth, repulsive.
template <int D>
Vec<D> elasticNormalForce(const ContactSummary<D>& summary, const ElasticContactParams& params) {
  if (!summary.penetrating) return Vec<D>::Zero();
  return params.kn * summary.bond;
}

/// Rate of the stored shear force: -ks * v_a while penetrating, else zero.
template <int D>
Vec<D> shearRhs(const ContactSummary<D>& summary, double ks) {
  if (!summary.penetrating) return Vec<D>::Zero();
  return -ks * summary.tangentialVelocity;
}

/// Coulomb cap: rescale the shear force to magnitude mu*||Fn|| preserving its
/// direction when it exceeds the cap.
template <int D>
Vec<D> coulombCap(const Vec<D>& shear, const Vec<D>& normalForce, double mu) {
  const double cap = mu * normalForce.norm();
  const double mag = shear.norm();
  if (mag <= cap || mag == 0.0) return mag <= cap ? shear : Vec<D>::Zero();
  return (cap / mag) * shear;
}

template <int D>
struct PairLoad {
  Vec<D> force = Vec<D>::Zero();        // on the home body; neighbor gets -force
  Vec<D> momentArm = Vec<D>::Zero();    // (x1+x2)/2
  Vec<D> normalPart = Vec<D>::Zero();   // total normal force (observer input)
  Vec<D> shearPart = Vec<D>::Zero();
};

/// Elastic contact: capped stored shear + elastic normal.
template <int D>
PairLoad<D> elasticForces(const ContactSummary<D>& summary, const ElasticContactParams& params,
                          const Vec<D>& shearState) {
  PairLoad<D> load;
  load.momentArm = 0.5 * (summary.x1 + summary.x2);
  if (!summary.penetrating) return load;
  load.normalPart = elasticNormalForce(summary, params);
  load.shearPart = coulombCap<D>(shearState, load.normalPart, params.mu);
  load.force = load.normalPart + load.shearPart;
  return load;
}

/// Viscoelastic (spring-dashpot) contact: elastic normal plus -gammaN*v_r,
/// and capped (stored shear - gammaS*v_a).
template <int D>
PairLoad<D> viscoelasticForces(const ContactSummary<D>& summary,
                               const ViscoelasticContactParams& params,
                               const Vec<D>& shearState) {
  PairLoad<D> load;
  load.momentArm = 0.5 * (summary.x1 + summary.x2);
  if (!summary.penetrating) return load;
  load.normalPart = elasticNormalForce(summary, params.elastic) - params.gammaN * summary.relVelocity;
  const Vec<D> shear = shearState - params.gammaS * summary.tangentialVelocity;
  load.shearPart = coulombCap<D>(shear, load.normalPart, params.elastic.mu);
  load.force = load.normalPart + load.shearPart;
  return load;
}

}  // namespace pmech
