#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "pmech/common.hpp"
#include "pmech/rigid_body.hpp"

namespace pmech {

template <int D>
struct Bond {
  int i = -1;  // point indices with i < j
  int j = -1;
  Vec<D> refVector = Vec<D>::Zero();  // x_j - x_i in the reference configuration
  double refLength = 0.0;
  bool broken = false;
};

/// Horizon connectivity of a peridynamic point cloud with per-point weighted
/// volumes. Broken bonds never heal; weighted volumes exclude broken bonds.
template <int D>
struct BondSet {
  std::vector<Bond<D>> bonds;                 // sorted by (i, j)
  std::vector<std::vector<int>> adjacency;    // point -> bond indices
  std::vector<double> weightedVolume;         // m(x) per point
  double horizon = 0.0;
  double pointVolume = 0.0;                   // V_r
};

struct LinearSolidMaterial {
  double bulkModulus = 0.0;     // k
  double shearModulus = 0.0;    // mu_s
  double horizon = 0.0;         // delta
  double criticalStretch = 0.01;
  double pointVolume = 0.0;     // V_r
  double density = 0.0;
};

struct BeamBondMaterial {
  double youngsModulus = 0.0;  // E
  double secondMoment = 0.0;   // I
  double area = 0.0;           // A
  double bondRadius = 0.0;     // r (bonding cutoff in radius mode)
};

/// Gaussian influence function omega(||xi||) = exp(-||xi||^2 / delta^2).
inline double influence(double xiLength, double horizon) {
  const double r = xiLength / horizon;
  return std::exp(-r * r);
}

/// Bond extension e = ||(x' + u') - (x + u)|| - ||x' - x||.
template <int D>
double bondExtension(const Vec<D>& x, const Vec<D>& xPrime, const Vec<D>& u, const Vec<D>& uPrime) {
  return ((xPrime + uPrime) - (x + u)).norm() - (xPrime - x).norm();
}

/// Build the horizon: bond (i,j) iff 0 < ||x_j - x_i|| <= delta. Also
/// precomputes the weighted volumes.
template <int D>
BondSet<D> buildHorizon(const std::vector<Vec<D>>& points, double horizon, double pointVolume);

/// m(x) = sum over unbroken bonds of omega(||xi||) ||xi||^2 V_r.
/// Throws IsolatedPoint when the point has no unbroken bonds.
template <int D>
double weightedVolume(const BondSet<D>& set, int point);

void recomputeWeightedVolumes(auto& set) {
  for (size_t p = 0; p < set.adjacency.size(); ++p) {
    double m = 0.0;
    for (int bi : set.adjacency[p]) {
      const auto& b = set.bonds[bi];
      if (b.broken) continue;
      m += influence(b.refLength, set.horizon) * b.refLength * b.refLength * set.pointVolume;
    }
    set.weightedVolume[p] = m;
  }
}

/// Nonlocal dilation theta(x) = (3 / m(x)) sum omega ||xi|| e V_r over
/// unbroken bonds; equals 3*eps for a uniform expansion by eps.
template <int D>
std::vector<double> computeDilations(const BondSet<D>& set, const std::vector<Vec<D>>& refPoints,
                                     const std::vector<Vec<D>>& curPoints);

/// Linear peridynamic solid scalar force state:
///   f = omega(||xi||) * (3 k theta ||xi|| + 15 mu_s e_dev) / m(x),
/// with e_dev = e - theta ||xi|| / 3.
inline double linearSolidScalarState(double omega, double xiLength, double theta, double extension,
                                     double weightedVol, const LinearSolidMaterial& mat) {
  const double eDev = extension - theta * xiLength / 3.0;
  return omega * (3.0 * mat.bulkModulus * theta * xiLength + 15.0 * mat.shearModulus * eDev) /
         weightedVol;
}

/// Assemble per-point internal forces of the linear peridynamic solid. The
/// pairwise density eta_ij = (f(i,j) + f(j,i)) * Yhat_ij is antisymmetric by
/// construction; forces are eta_ij * V_r^2.
template <int D>
std::vector<Vec<D>> assemblePeridynamicForces(const BondSet<D>& set,
                                              const std::vector<Vec<D>>& refPoints,
                                              const std::vector<Vec<D>>& curPoints,
                                              const LinearSolidMaterial& mat);

/// Break every bond with stretch e/||xi|| > criticalStretch; returns the newly
/// broken (i, j) pairs and refreshes the weighted volumes.
template <int D>
std::vector<std::pair<int, int>> applyFracture(BondSet<D>& set, const std::vector<Vec<D>>& refPoints,
                                               const std::vector<Vec<D>>& curPoints,
                                               double criticalStretch);

template <int D>
struct BeamLoads {
  Vec<D> forceI = Vec<D>::Zero();
  Vec<D> forceJ = Vec<D>::Zero();
  AngularVelocity<D> torqueI = Kinematics<D>::zeroAngular();
  AngularVelocity<D> torqueJ = Kinematics<D>::zeroAngular();
};

/// Euler-Bernoulli two-node beam element between bonded material points
/// (co-rotational; axial + bending, plus torsion in 3-D). Endpoint
/// orientations are measured from the identity reference orientation.
/// Force and moment resultants balance exactly.
template <int D>
BeamLoads<D> beamBondLoads(const Bond<D>& bond, const Pose<D>& poseI, const Pose<D>& poseJ,
                           const BeamBondMaterial& mat);

}  // namespace pmech
