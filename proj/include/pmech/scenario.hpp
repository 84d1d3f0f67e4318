#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pmech/common.hpp"
#include "pmech/observers.hpp"
#include "pmech/peridynamics.hpp"
#include "pmech/simulation.hpp"

namespace pmech {

// ---- configuration -------------------------------------------------------------
//
// Line-oriented structured text. Top-level `key value...` lines plus nested
// sections opened by a section keyword and closed by `end`:
//
//   dimension 3
//   dt 1e-3
//   t_end 1
//   contact viscoelastic
//     kn 20
//     ...
//   end
//   body sphere
//     radius 0.5
//     ...
//   end
//
// `#` starts a comment. Parsing validates the whole file and reports every
// schema error at once (SchemaError with line diagnostics).

struct BodySpec {
  enum class Kind { Sphere, Box, Wall, Polygon, Prism };
  Kind kind = Kind::Sphere;
  int id = -1;  // -1: assigned in declaration order
  double radius = 0.0;
  Vec3 extents = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // wall
  double offset = 0.0;
  std::vector<Vec2> polygon;  // explicit vertices (polygon / prism base)
  int sides = 0;              // regular polygon alternative
  double circumradius = 0.0;
  double height = 0.0;                // prism extrusion height
  std::vector<double> randomHeights;  // draw height from this set (seeded)
  double density = 1.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 angularVelocity = Vec3::Zero();
  Vec3 orientationAxis = Vec3::UnitZ();
  double orientationAngle = 0.0;
  bool fixed = false;
};

struct HexPackingSpec {
  int rows = 1, cols = 1, layers = 1;
  double radius = 0.0;
  double density = 1.0;
  Vec3 origin = Vec3::Zero();
};

struct GrowSpec {
  int body = -1;  // body id
  double rate = 0.0;
};

struct PlateSpec {
  int nx = 0, ny = 0, nz = 1;
  double r1 = 0.0, r2 = 0.0;     // elliptical hole semi-axes
  double horizonFactor = 3.015;  // delta = factor * spacing
  double bulkModulus = 0.0;
  double shearModulus = 0.0;
  double criticalStretch = 0.01;
  double density = 1.0;
  double forceScale = 3.0;  // beta magnitude at t -> infinity
  double rampRate = 10.0;
  double strip = 0.05;  // driven strip width on each side
  double thickness = 0.01;
};

struct CantileverSpec {
  int n = 0;
  double length = 1.0;
  double youngsModulus = 0.0;
  double secondMoment = 0.0;
  double area = 0.0;
  double totalMass = 1.0;
  double accel = 0.0;  // transverse body acceleration a
  double damping = 0.0;
  bool radiusMode = false;  // bond all pairs within bondRadius instead of adjacent
  double bondRadius = 0.0;
};

struct ContactSpec {
  bool viscous = false;
  double kn = 0.0, ks = 0.0, mu = 0.0;
  double gammaN = 0.0, gammaS = 0.0;
};

struct StrainSpec {
  int body = -1;  // body id tracked for the strain proxy; -1 disables
  int axis = 2;
  double ref = 0.0;
  double length = 1.0;
};

struct ScenarioConfig {
  int dimension = 3;
  StepPlan plan;
  unsigned long seed = 0;
  int threads = 1;
  Vec3 gravity = Vec3::Zero();
  bool trackAll = true;
  std::vector<int> trackIds;
  StrainSpec strain;
  ContactSpec contact;
  bool hasContact = false;
  std::string outDir;
  std::vector<BodySpec> bodies;
  std::vector<HexPackingSpec> hexPackings;
  std::vector<GrowSpec> grows;
  std::vector<PlateSpec> plates;
  std::vector<CantileverSpec> cantilevers;
};

/// Parse and validate; throws SchemaError listing every problem found.
ScenarioConfig parseConfig(const std::string& text);

// ---- builders --------------------------------------------------------------------

/// Hexagonal close packing; single layer has row offset r and row spacing
/// r*sqrt(3). No pair of centers is closer than 2r.
std::vector<Vec3> hexPackingCenters(int rows, int cols, int layers, double radius);

struct PlateWithHole {
  std::vector<Vec3> points;
  BondSet<3> bonds;
  double spacing = 0.0;  // in-plane lattice constant
  double pointVolume = 0.0;
  double horizon = 0.0;
};

/// Cubic lattice on the unit plate (1 x 1 x thickness) minus the elliptical
/// hole (x-0.5)^2/r1^2 + (y-0.5)^2/r2^2 < 1; bonds within the horizon.
/// Degenerate hole radii (<= 0) remove nothing.
PlateWithHole buildPlateWithHole(int nx, int ny, int nz, double r1, double r2,
                                 double horizonFactor, double thickness = 0.01);

struct CantileverBuild {
  std::vector<Vec2> points;  // along x from 0 to length
  BondSet<2> bonds;
  std::vector<double> pointMass;  // trapezoidal lumping of the total mass
  double spacing = 0.0;
};

/// Evenly spaced beam points, bonded adjacent-only or all pairs within
/// bondRadius; point 0 is the clamped end.
CantileverBuild buildCantilever(int n, double length, double totalMass, bool radiusMode = false,
                                double bondRadius = 0.0);

template <int D>
struct BuiltScenario {
  std::unique_ptr<Simulation<D>> sim;
  StepPlan plan;
  std::vector<int> trackIds;  // resolved body ids, ascending
  StrainSpec strain;
};

/// Instantiate the configured scenario. Runs a pre-flight check: any initial
/// penetration between contact-eligible bodies is a SchemaError.
template <int D>
BuiltScenario<D> buildScenario(const ScenarioConfig& cfg);

// ---- writers ---------------------------------------------------------------------

/// All numbers at 17 significant digits; header exactly
/// `t,id,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz`.
void writeTimeseriesCsv(const std::string& path, const std::vector<ParticleRecord>& rows);

/// Header exactly `t,strain,sxx,syy,szz,sxy,sxz,syz,V`.
void writeCollectionCsv(const std::string& path, const std::vector<CollectionRecord>& rows);

/// VTK legacy ASCII POLYDATA snapshot of the bounded bodies with per-point
/// velocity, angular velocity, body id and broken-bond count.
template <int D>
void writeVtkSnapshot(const std::string& path, const Simulation<D>& sim,
                      const std::vector<int>& brokenCounts);

/// Observer that buffers CSV rows and writes one VTK file per firing.
template <int D>
class RunWriter {
 public:
  RunWriter(std::string directory, std::vector<int> trackIds, StrainSpec strain);

  void observe(const Simulation<D>& sim, double t);
  void flush() const;  // writes timeseries.csv and collection.csv

 private:
  std::string directory_;
  std::vector<int> trackIds_;
  StrainSpec strain_;
  std::vector<int> initialBonds_;  // per body index, captured on first firing
  std::vector<ParticleRecord> particleRows_;
  std::vector<CollectionRecord> collectionRows_;
  int outputIndex_ = 0;
};

/// CLI entry point. Exit codes: 0 success, 1 usage, 2 schema/config error,
/// 3 runtime abort.
int runCli(int argc, char** argv);

}  // namespace pmech
