#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pmech/peridynamics.hpp"

using namespace pmech;

namespace {

std::vector<Vec3> cubicLattice(int n, double spacing) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) pts.emplace_back(i * spacing, j * spacing, k * spacing);
  return pts;
}

template <int D>
std::vector<Vec<D>> scaled(const std::vector<Vec<D>>& pts, double factor) {
  std::vector<Vec<D>> out = pts;
  for (auto& p : out) p *= factor;
  return out;
}

LinearSolidMaterial testMaterial(double horizon, double pointVolume) {
  LinearSolidMaterial m;
  m.bulkModulus = 2.0;
  m.shearModulus = 1.0;
  m.horizon = horizon;
  m.criticalStretch = 0.01;
  m.pointVolume = pointVolume;
  m.density = 1.0;
  return m;
}

}  // namespace

TEST_CASE("horizon construction") {
  // two points one unit apart
  std::vector<Vec3> two = {{0, 0, 0}, {1, 0, 0}};
  CHECK(buildHorizon<3>(two, 0.5, 1.0).bonds.empty());
  const auto one = buildHorizon<3>(two, 1.5, 1.0);
  REQUIRE(one.bonds.size() == 1);
  CHECK(one.bonds[0].i == 0);
  CHECK(one.bonds[0].j == 1);
  CHECK(one.bonds[0].refLength == doctest::Approx(1.0));
  CHECK((one.bonds[0].refVector - Vec3(1, 0, 0)).norm() < 1e-15);

  // 10x10 planar grid, spacing h, horizon 1.5h: interior points bond to the
  // 8-neighborhood (axis neighbors at h, diagonals at sqrt(2) h <= 1.5 h)
  std::vector<Vec2> grid;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) grid.emplace_back(i * 0.1, j * 0.1);
  const auto set = buildHorizon<2>(grid, 0.15, 0.01);
  const int interior = 5 * 10 + 5;  // point (5,5)
  CHECK(set.adjacency[interior].size() == 8);

  // brute-force O(n^2) oracle on random clouds
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 60; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const double delta = 0.3;
    const auto bs = buildHorizon<3>(pts, delta, 1.0);
    size_t expected = 0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        const double d = (pts[j] - pts[i]).norm();
        if (d > 0.0 && d <= delta) ++expected;
      }
    CHECK(bs.bonds.size() == expected);
    for (size_t b = 1; b < bs.bonds.size(); ++b) {
      const bool ordered = bs.bonds[b - 1].i < bs.bonds[b].i ||
                           (bs.bonds[b - 1].i == bs.bonds[b].i && bs.bonds[b - 1].j < bs.bonds[b].j);
      CHECK(ordered);
    }
  }
}

TEST_CASE("influence function and bond extension") {
  CHECK(influence(0.0, 2.0) == doctest::Approx(1.0));
  CHECK(influence(1.0, 2.0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(influence(2.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  CHECK(bondExtension<3>(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3::Zero(), Vec3::Zero()) ==
        doctest::Approx(0.0));
  CHECK(bondExtension<3>(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3::Zero(), Vec3(0.1, 0, 0)) ==
        doctest::Approx(0.1));
  // transverse displacement: e = sqrt(1 + 0.1^2) - 1
  CHECK(bondExtension<3>(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3::Zero(), Vec3(0, 0.1, 0)) ==
        doctest::Approx(std::sqrt(1.01) - 1.0).epsilon(1e-12));
}

TEST_CASE("weighted volume") {
  // single bond of length 1 at horizon 2, V_r = 1: m = exp(-1/4) ~ 0.7788
  std::vector<Vec3> two = {{0, 0, 0}, {1, 0, 0}};
  const auto set = buildHorizon<3>(two, 2.0, 1.0);
  CHECK(weightedVolume(set, 0) == doctest::Approx(0.7788).epsilon(1e-4));
  CHECK(weightedVolume(set, 0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));

  // independent re-summation on a lattice
  const auto pts = cubicLattice(4, 0.25);
  const auto grid = buildHorizon<3>(pts, 0.5, 0.25 * 0.25 * 0.25);
  for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
    double m = 0.0;
    for (size_t q = 0; q < pts.size(); ++q) {
      if (static_cast<int>(q) == p) continue;
      const double L = (pts[q] - pts[p]).norm();
      if (L <= 0.5) m += influence(L, 0.5) * L * L * grid.pointVolume;
    }
    CHECK(weightedVolume(grid, p) == doctest::Approx(m).epsilon(1e-12));
    CHECK(grid.weightedVolume[p] == doctest::Approx(m).epsilon(1e-12));
  }

  BondSet<3> isolated = buildHorizon<3>(two, 2.0, 1.0);
  isolated.bonds[0].broken = true;
  CHECK_THROWS_AS(weightedVolume(isolated, 0), IsolatedPoint);
}

TEST_CASE("dilation is 3*eps for uniform expansion on three lattices") {
  const double eps = 0.01;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.02, 0.02);

  // cubic, stretched-cubic, and jittered lattices
  std::vector<std::vector<Vec3>> lattices;
  lattices.push_back(cubicLattice(6, 0.2));
  {
    auto pts = cubicLattice(6, 0.2);
    for (auto& p : pts) p.z() *= 0.8;
    lattices.push_back(pts);
  }
  {
    auto pts = cubicLattice(6, 0.2);
    for (auto& p : pts) p += Vec3(u(rng), u(rng), u(rng));
    lattices.push_back(pts);
  }

  for (const auto& pts : lattices) {
    const auto set = buildHorizon<3>(pts, 0.45, 0.008);
    const auto cur = scaled<3>(pts, 1.0 + eps);
    const auto theta = computeDilations<3>(set, pts, cur);
    for (double th : theta) CHECK(th == doctest::Approx(3.0 * eps).epsilon(1e-9));
  }
}

TEST_CASE("dilation vanishes for rigid motion") {
  const auto pts = cubicLattice(5, 0.25);
  const auto set = buildHorizon<3>(pts, 0.5, 0.015625);
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(0.7, Vec3(1, 2, 2).normalized()).toRotationMatrix();
  std::vector<Vec3> cur;
  for (const auto& p : pts) cur.push_back(R * p + Vec3(0.3, -0.1, 0.2));
  for (double th : computeDilations<3>(set, pts, cur)) CHECK(std::abs(th) < 1e-12);
}

TEST_CASE("scalar force state: deviatoric part isolates shear") {
  // pure dilation: e = theta*L/3 exactly, so the shear term vanishes
  const double omega = 0.5, L = 1.0, theta = 0.03;
  const auto mat = testMaterial(2.0, 1.0);
  const double f = linearSolidScalarState(omega, L, theta, theta * L / 3.0, 2.0, mat);
  CHECK(f == doctest::Approx(omega * 3.0 * mat.bulkModulus * theta * L / 2.0).epsilon(1e-12));
  // zero deformation: zero state
  CHECK(linearSolidScalarState(omega, L, 0.0, 0.0, 2.0, mat) == doctest::Approx(0.0));
}

TEST_CASE("assembled forces: hand-computed two-point oracle") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}};
  const double Vr = 0.5;
  auto set = buildHorizon<3>(pts, 2.0, Vr);
  const auto mat = testMaterial(2.0, Vr);
  const double stretch = 0.01;
  std::vector<Vec3> cur = {{0, 0, 0}, {1.0 + stretch, 0, 0}};

  // hand computation: omega = exp(-1/4); m = omega * 1 * Vr;
  // theta = (3/m) * omega * 1 * e * Vr = 3*e; e_dev = e - theta/3 = 0;
  // f(i,j) = omega * 3 k theta * 1 / m; eta = 2 f * (1,0,0); F_i = eta * Vr^2
  const double omega = std::exp(-0.25);
  const double m = omega * Vr;
  const double theta = 3.0 * stretch;
  const double f = omega * 3.0 * mat.bulkModulus * theta / m;
  const double expected = 2.0 * f * Vr * Vr;

  const auto forces = assemblePeridynamicForces<3>(set, pts, cur, mat);
  CHECK((forces[0] - Vec3(expected, 0, 0)).norm() < 1e-12 * expected);
  CHECK((forces[1] + Vec3(expected, 0, 0)).norm() < 1e-12 * expected);

  // zero displacement gives identically zero forces
  for (const auto& F : assemblePeridynamicForces<3>(set, pts, pts, mat))
    CHECK(F.norm() == 0.0);
}

TEST_CASE("assembled forces sum to zero and vanish for rigid rotation") {
  auto pts = cubicLattice(5, 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  const auto set = buildHorizon<3>(pts, 0.45, 0.008);
  const auto mat = testMaterial(0.45, 0.008);

  std::vector<Vec3> cur = pts;
  for (auto& p : cur) p += Vec3(u(rng), u(rng), u(rng));
  const auto forces = assemblePeridynamicForces<3>(set, pts, cur, mat);
  Vec3 total = Vec3::Zero();
  double maxF = 0.0;
  for (const auto& F : forces) {
    total += F;
    maxF = std::max(maxF, F.norm());
  }
  CHECK(total.norm() < 1e-12 * pts.size() * maxF);

  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.4, Vec3(0, 1, 1).normalized()).toRotationMatrix();
  std::vector<Vec3> rot;
  for (const auto& p : pts) rot.push_back(R * p + Vec3(1, 2, 3));
  const double scale = mat.bulkModulus * mat.pointVolume;
  for (const auto& F : assemblePeridynamicForces<3>(set, pts, rot, mat))
    CHECK(F.norm() < 1e-9 * scale);
}

TEST_CASE("interior points are in equilibrium under uniform stretch") {
  const int n = 9;
  const double h = 1.0 / (n - 1);
  auto pts = cubicLattice(n, h);
  const double delta = 3.015 * h;
  const double Vr = h * h * h;
  const auto set = buildHorizon<3>(pts, delta, Vr);
  auto mat = testMaterial(delta, Vr);
  const double eps = 1e-3;
  const auto cur = scaled<3>(pts, 1.0 + eps);
  const auto forces = assemblePeridynamicForces<3>(set, pts, cur, mat);
  // interior = further than delta from every face
  for (int idx = 0; idx < static_cast<int>(pts.size()); ++idx) {
    bool interior = true;
    for (int d = 0; d < 3; ++d)
      if (pts[idx][d] < delta || pts[idx][d] > 1.0 - delta) interior = false;
    if (!interior) continue;
    CHECK(forces[idx].norm() <= 1e-6 * mat.bulkModulus * Vr * eps);
  }
}

TEST_CASE("fracture breaks over-stretched bonds permanently") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  auto set = buildHorizon<3>(pts, 1.5, 1.0);
  REQUIRE(set.bonds.size() == 2);
  // stretch only the first bond past critical
  std::vector<Vec3> cur = {{0, 0, 0}, {1.02, 0, 0}, {2.02, 0, 0}};
  const auto broken = applyFracture<3>(set, pts, cur, 0.01);
  REQUIRE(broken.size() == 1);
  CHECK(broken[0] == std::pair<int, int>{0, 1});
  CHECK(set.bonds[0].broken);
  CHECK(!set.bonds[1].broken);
  // weighted volumes refreshed: point 1 lost its (0,1) bond
  CHECK(set.weightedVolume[1] == doctest::Approx(influence(1.0, 1.5)).epsilon(1e-12));

  // bonds never heal even if the stretch relaxes
  const auto again = applyFracture<3>(set, pts, pts, 0.01);
  CHECK(again.empty());
  CHECK(set.bonds[0].broken);
}

TEST_CASE("beam bond: undeformed and axial response") {
  Bond<2> bond;
  bond.i = 0;
  bond.j = 1;
  bond.refVector = Vec2(1, 0);
  bond.refLength = 1.0;
  BeamBondMaterial mat{100.0, 0.01, 0.5, 0.0};

  // undeformed: zero loads
  const auto zero = beamBondLoads<2>(bond, Pose<2>{Vec2(0, 0), 0.0}, Pose<2>{Vec2(1, 0), 0.0}, mat);
  CHECK(zero.forceI.norm() < 1e-12);
  CHECK(zero.forceJ.norm() < 1e-12);
  CHECK(std::abs(zero.torqueI) < 1e-12);

  // pure axial stretch: F = EA * strain along the axis, tension pulls I toward J
  const double strain = 0.001;
  const auto ax =
      beamBondLoads<2>(bond, Pose<2>{Vec2(0, 0), 0.0}, Pose<2>{Vec2(1 + strain, 0), 0.0}, mat);
  CHECK(ax.forceI.x() == doctest::Approx(mat.youngsModulus * mat.area * strain).epsilon(1e-9));
  CHECK((ax.forceI + ax.forceJ).norm() < 1e-12);
}

TEST_CASE("beam bond: force and moment resultants balance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> small(-0.02, 0.02);
  BeamBondMaterial mat{1000.0, 0.02, 0.3, 0.0};

  for (int trial = 0; trial < 50; ++trial) {
    Bond<2> bond;
    bond.i = 0;
    bond.j = 1;
    bond.refVector = Vec2(0.5, 0);
    bond.refLength = 0.5;
    Pose<2> pi{Vec2(small(rng), small(rng)), small(rng)};
    Pose<2> pj{Vec2(0.5 + small(rng), small(rng)), small(rng)};
    const auto l = beamBondLoads<2>(bond, pi, pj, mat);
    CHECK((l.forceI + l.forceJ).norm() < 1e-10 * (l.forceI.norm() + 1.0));
    // total moment about the origin must vanish
    const double total =
        l.torqueI + l.torqueJ + planarCross(pi.center, l.forceI) + planarCross(pj.center, l.forceJ);
    CHECK(std::abs(total) < 1e-10 * (std::abs(l.torqueI) + 1.0));
  }

  // 3-D version with rotations about z matches the planar element
  for (int trial = 0; trial < 25; ++trial) {
    Bond<2> b2;
    b2.i = 0;
    b2.j = 1;
    b2.refVector = Vec2(0.5, 0);
    b2.refLength = 0.5;
    Bond<3> b3;
    b3.i = 0;
    b3.j = 1;
    b3.refVector = Vec3(0.5, 0, 0);
    b3.refLength = 0.5;
    const Vec2 di(small(rng), small(rng)), dj(small(rng), small(rng));
    const double thi = small(rng), thj = small(rng);
    Pose<2> pi2{di, thi};
    Pose<2> pj2{Vec2(0.5, 0) + dj, thj};
    // reference orientation q maps global -> reference: rotation by -theta
    Pose<3> pi3{Vec3(di.x(), di.y(), 0), quaternionFromAxisAngle(Vec3(0, 0, 1), -thi)};
    Pose<3> pj3{Vec3(0.5 + dj.x(), dj.y(), 0), quaternionFromAxisAngle(Vec3(0, 0, 1), -thj)};
    const auto l2 = beamBondLoads<2>(b2, pi2, pj2, mat);
    const auto l3 = beamBondLoads<3>(b3, pi3, pj3, mat);
    CHECK((l3.forceI.head<2>() - l2.forceI).norm() < 1e-9 * (l2.forceI.norm() + 1.0));
    CHECK(std::abs(l3.forceI.z()) < 1e-12);
    CHECK(l3.torqueI.z() == doctest::Approx(l2.torqueI).epsilon(1e-9));
    // force/moment balance in 3-D including torsion
    CHECK((l3.forceI + l3.forceJ).norm() < 1e-10 * (l3.forceI.norm() + 1.0));
    const Vec3 total = l3.torqueI + l3.torqueJ + pi3.center.cross(l3.forceI) +
                       pj3.center.cross(l3.forceJ);
    CHECK(total.norm() < 1e-10 * (l3.torqueI.norm() + 1.0));
  }
}

TEST_CASE("beam bending stiffness scales linearly with E") {
  Bond<2> bond;
  bond.i = 0;
  bond.j = 1;
  bond.refVector = Vec2(1, 0);
  bond.refLength = 1.0;
  BeamBondMaterial m1{1000.0, 0.01, 0.2, 0.0};
  BeamBondMaterial m2{2000.0, 0.01, 0.2, 0.0};
  // small transverse offset of node j
  Pose<2> pi{Vec2(0, 0), 0.0}, pj{Vec2(1, 0.001), 0.0};
  const auto l1 = beamBondLoads<2>(bond, pi, pj, m1);
  const auto l2 = beamBondLoads<2>(bond, pi, pj, m2);
  CHECK(l2.forceI.y() == doctest::Approx(2.0 * l1.forceI.y()).epsilon(1e-9));
  CHECK(l2.torqueI == doctest::Approx(2.0 * l1.torqueI).epsilon(1e-9));
}
