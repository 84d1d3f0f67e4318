#include "pmech/peridynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmech/neighbors.hpp"

namespace pmech {

namespace {

double wrapToPi(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

template <int D>
BondSet<D> buildHorizon(const std::vector<Vec<D>>& points, double horizon, double pointVolume) {
  BondSet<D> set;
  set.horizon = horizon;
  set.pointVolume = pointVolume;
  const int n = static_cast<int>(points.size());
  set.adjacency.resize(n);
  set.weightedVolume.assign(n, 0.0);

  SpatialIndex<D> index(points);
  for (int i = 0; i < n; ++i) {
    // query slightly beyond delta, then apply the inclusive <= delta rule
    for (int j : index.radiusQuery(points[i], horizon * (1.0 + 1e-12) + 1e-300, i)) {
      if (j <= i) continue;
      const Vec<D> xi = points[j] - points[i];
      const double len = xi.norm();
      if (len <= 0.0 || len > horizon) continue;
      Bond<D> b;
      b.i = i;
      b.j = j;
      b.refVector = xi;
      b.refLength = len;
      set.bonds.push_back(b);
    }
  }
  std::sort(set.bonds.begin(), set.bonds.end(), [](const Bond<D>& a, const Bond<D>& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (size_t bi = 0; bi < set.bonds.size(); ++bi) {
    set.adjacency[set.bonds[bi].i].push_back(static_cast<int>(bi));
    set.adjacency[set.bonds[bi].j].push_back(static_cast<int>(bi));
  }
  recomputeWeightedVolumes(set);
  return set;
}

template <int D>
double weightedVolume(const BondSet<D>& set, int point) {
  double m = 0.0;
  int count = 0;
  for (int bi : set.adjacency[point]) {
    const auto& b = set.bonds[bi];
    if (b.broken) continue;
    m += influence(b.refLength, set.horizon) * b.refLength * b.refLength * set.pointVolume;
    ++count;
  }
  if (count == 0) throw IsolatedPoint("point has no unbroken bonds");
  return m;
}

template <int D>
std::vector<double> computeDilations(const BondSet<D>& set, const std::vector<Vec<D>>& refPoints,
                                     const std::vector<Vec<D>>& curPoints) {
  std::vector<double> theta(refPoints.size(), 0.0);
  for (const auto& b : set.bonds) {
    if (b.broken) continue;
    const double e = (curPoints[b.j] - curPoints[b.i]).norm() - b.refLength;
    const double w = influence(b.refLength, set.horizon) * b.refLength * e * set.pointVolume;
    theta[b.i] += w;
    theta[b.j] += w;
  }
  for (size_t p = 0; p < theta.size(); ++p) {
    if (set.weightedVolume[p] > 0.0) theta[p] *= 3.0 / set.weightedVolume[p];
  }
  return theta;
}

template <int D>
std::vector<Vec<D>> assemblePeridynamicForces(const BondSet<D>& set,
                                              const std::vector<Vec<D>>& refPoints,
                                              const std::vector<Vec<D>>& curPoints,
                                              const LinearSolidMaterial& mat) {
  std::vector<Vec<D>> forces(refPoints.size(), Vec<D>::Zero());
  const std::vector<double> theta = computeDilations(set, refPoints, curPoints);
  const double vr2 = set.pointVolume * set.pointVolume;

  for (const auto& b : set.bonds) {
    if (b.broken) continue;
    const Vec<D> deformed = curPoints[b.j] - curPoints[b.i];
    const double len = deformed.norm();
    if (len < 1e-12) throw DegenerateDeformedBond("deformed bond length below 1e-12");
    const double e = len - b.refLength;
    const double w = influence(b.refLength, set.horizon);
    const double fij = linearSolidScalarState(w, b.refLength, theta[b.i], e,
                                              set.weightedVolume[b.i], mat);
    const double fji = linearSolidScalarState(w, b.refLength, theta[b.j], e,
                                              set.weightedVolume[b.j], mat);
    const Vec<D> eta = (fij + fji) * (deformed / len);  // antisymmetric under i<->j
    forces[b.i] += eta * vr2;
    forces[b.j] -= eta * vr2;
  }
  return forces;
}

template <int D>
std::vector<std::pair<int, int>> applyFracture(BondSet<D>& set, const std::vector<Vec<D>>& refPoints,
                                               const std::vector<Vec<D>>& curPoints,
                                               double criticalStretch) {
  (void)refPoints;
  std::vector<std::pair<int, int>> brokenNow;
  for (auto& b : set.bonds) {
    if (b.broken) continue;
    const double len = (curPoints[b.j] - curPoints[b.i]).norm();
    const double stretch = (len - b.refLength) / b.refLength;
    if (stretch > criticalStretch) {
      b.broken = true;
      brokenNow.emplace_back(b.i, b.j);
    }
  }
  if (!brokenNow.empty()) recomputeWeightedVolumes(set);
  return brokenNow;
}

// ---- Euler-Bernoulli beam bonds -----------------------------------------------

template <>
BeamLoads<2> beamBondLoads<2>(const Bond<2>& bond, const Pose<2>& poseI, const Pose<2>& poseJ,
                              const BeamBondMaterial& mat) {
  const double L0 = bond.refLength;
  const Vec2 chord = poseJ.center - poseI.center;
  const double L = chord.norm();
  if (L < 1e-12) throw DegenerateDeformedBond("deformed beam bond length below 1e-12");

  const double alpha0 = std::atan2(bond.refVector.y(), bond.refVector.x());
  const double alpha = std::atan2(chord.y(), chord.x());
  const double chordRot = wrapToPi(alpha - alpha0);
  const double psi1 = wrapToPi(poseI.orientation - chordRot);
  const double psi2 = wrapToPi(poseJ.orientation - chordRot);

  const Vec2 axis = chord / L;
  const Vec2 perp(-axis.y(), axis.x());

  const double axial = mat.youngsModulus * mat.area * (L - L0) / L0;
  const double EIoverL = mat.youngsModulus * mat.secondMoment / L0;
  const double momentI = -EIoverL * (4.0 * psi1 + 2.0 * psi2);
  const double momentJ = -EIoverL * (2.0 * psi1 + 4.0 * psi2);
  // transverse pair chosen so force and moment resultants vanish exactly
  const double shear = (momentI + momentJ) / L;

  BeamLoads<2> loads;
  loads.forceI = axial * axis + shear * perp;
  loads.forceJ = -loads.forceI;
  loads.torqueI = momentI;
  loads.torqueJ = momentJ;
  return loads;
}

template <>
BeamLoads<3> beamBondLoads<3>(const Bond<3>& bond, const Pose<3>& poseI, const Pose<3>& poseJ,
                              const BeamBondMaterial& mat) {
  const double L0 = bond.refLength;
  const Vec3 refAxis = bond.refVector / L0;
  const Vec3 chord = poseJ.center - poseI.center;
  const double L = chord.norm();
  if (L < 1e-12) throw DegenerateDeformedBond("deformed beam bond length below 1e-12");
  const Vec3 axis = chord / L;

  // reference triad (refAxis, n1, n2)
  int least = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(refAxis[k]) < std::abs(refAxis[least])) least = k;
  const Vec3 n1 = refAxis.cross(Vec3::Unit(least)).normalized();
  const Vec3 n2 = refAxis.cross(n1);

  // shortest-arc chord rotation and node rotations relative to the chord,
  // expressed in the reference triad
  const Eigen::Quaterniond chordRot = Eigen::Quaterniond::FromTwoVectors(refAxis, axis);
  auto localRotation = [&](const Eigen::Quaterniond& orientation) {
    // orientation maps global -> reference, so the body's world rotation is
    // its conjugate
    const Eigen::Quaterniond rel = chordRot.conjugate() * orientation.conjugate();
    const Eigen::AngleAxisd aa(rel.normalized());
    return Vec3(aa.angle() * aa.axis());
  };
  const Vec3 phiI = localRotation(poseI.orientation);
  const Vec3 phiJ = localRotation(poseJ.orientation);

  const double EIoverL = mat.youngsModulus * mat.secondMoment / L0;
  // torsion with nu = 0.3: G = E / 2.6, J = 2I for a circular section
  const double GJoverL = (mat.youngsModulus / 2.6) * (2.0 * mat.secondMoment) / L0;

  BeamLoads<3> loads;
  const double axial = mat.youngsModulus * mat.area * (L - L0) / L0;
  loads.forceI = axial * axis;
  loads.forceJ = -axial * axis;

  const double twist = GJoverL * (phiJ.dot(refAxis) - phiI.dot(refAxis));
  loads.torqueI += twist * axis;
  loads.torqueJ -= twist * axis;

  for (const Vec3& bRef : {n1, n2}) {
    const double theta1 = phiI.dot(bRef);
    const double theta2 = phiJ.dot(bRef);
    const double momentI = -EIoverL * (4.0 * theta1 + 2.0 * theta2);
    const double momentJ = -EIoverL * (2.0 * theta1 + 4.0 * theta2);
    const Vec3 bCur = chordRot * bRef;
    const Vec3 shearDir = bCur.cross(axis);  // transverse deflection direction of this plane
    // transverse pair chosen so the moment resultant vanishes exactly
    const double t = (momentI + momentJ) / L;
    loads.forceI += t * shearDir;
    loads.forceJ -= t * shearDir;
    loads.torqueI += momentI * bCur;
    loads.torqueJ += momentJ * bCur;
  }
  return loads;
}

template BondSet<2> buildHorizon<2>(const std::vector<Vec2>&, double, double);
template BondSet<3> buildHorizon<3>(const std::vector<Vec3>&, double, double);
template double weightedVolume<2>(const BondSet<2>&, int);
template double weightedVolume<3>(const BondSet<3>&, int);
template std::vector<double> computeDilations<2>(const BondSet<2>&, const std::vector<Vec2>&,
                                                 const std::vector<Vec2>&);
template std::vector<double> computeDilations<3>(const BondSet<3>&, const std::vector<Vec3>&,
                                                 const std::vector<Vec3>&);
template std::vector<Vec2> assemblePeridynamicForces<2>(const BondSet<2>&, const std::vector<Vec2>&,
                                                        const std::vector<Vec2>&,
                                                        const LinearSolidMaterial&);
template std::vector<Vec3> assemblePeridynamicForces<3>(const BondSet<3>&, const std::vector<Vec3>&,
                                                        const std::vector<Vec3>&,
                                                        const LinearSolidMaterial&);
template std::vector<std::pair<int, int>> applyFracture<2>(BondSet<2>&, const std::vector<Vec2>&,
                                                           const std::vector<Vec2>&, double);
template std::vector<std::pair<int, int>> applyFracture<3>(BondSet<3>&, const std::vector<Vec3>&,
                                                           const std::vector<Vec3>&, double);

}  // namespace pmech
