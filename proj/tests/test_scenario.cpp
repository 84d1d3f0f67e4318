#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pmech/scenario.hpp"

using namespace pmech;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string errorOf(const std::string& config) {
  try {
    parseConfig(config);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return {};
}

int callCli(const std::vector<std::string>& args) {
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "pmech-sim");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return runCli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const auto cfg = parseConfig("dt 0.001\nt_end 1\n");
  CHECK(cfg.dimension == 3);
  CHECK(cfg.plan.dt == doctest::Approx(0.001));
  CHECK(cfg.plan.tEnd == doctest::Approx(1.0));
  CHECK(cfg.seed == 0);
  CHECK(cfg.trackAll);
  CHECK(!cfg.hasContact);
}

TEST_CASE("comments, sections and full-body round trip") {
  const std::string text = R"(# two spheres
dimension 3
dt 1e-3          # step
t_end 0.5
output_interval 0.1
seed 7
gravity 0 0 -9.81

contact viscoelastic
  kn 20
  ks 10
  mu 0.3
  gamma_n 0.08
  gamma_s 0.04
end

body sphere
  id 4
  radius 0.5
  density 2
  position 0 0 0
  velocity 1 0 0
end

body wall
  normal 0 0 1
  offset -1
end
)";
  const auto cfg = parseConfig(text);
  CHECK(cfg.contact.viscous);
  CHECK(cfg.contact.kn == doctest::Approx(20.0));
  CHECK(cfg.contact.gammaS == doctest::Approx(0.04));
  REQUIRE(cfg.bodies.size() == 2);
  CHECK(cfg.bodies[0].id == 4);
  CHECK(cfg.bodies[0].kind == BodySpec::Kind::Sphere);
  CHECK(cfg.bodies[1].kind == BodySpec::Kind::Wall);
  CHECK(cfg.bodies[1].fixed);
  CHECK((cfg.gravity - Vec3(0, 0, -9.81)).norm() < 1e-15);
}

TEST_CASE("schema errors are collected and reported together") {
  const std::string bad = R"(dt -1
t_end 0.5
gravityy 0 0 -1
contact elastic
  kn 10
  gamma_n 0.5
end
body sphere
end
)";
  const std::string msg = errorOf(bad);
  REQUIRE(!msg.empty());
  CHECK(msg.find("`dt` must be positive") != std::string::npos);
  CHECK(msg.find("did you mean `gravity`") != std::string::npos);
  CHECK(msg.find("gamma_n") != std::string::npos);
  CHECK(msg.find("radius") != std::string::npos);
  // every diagnostic carries its line number
  CHECK(msg.find("line 1:") != std::string::npos);
  CHECK(msg.find("line 3:") != std::string::npos);
}

TEST_CASE("missing required keys and malformed sections") {
  CHECK(errorOf("t_end 1\n").find("missing required key `dt`") != std::string::npos);
  CHECK(errorOf("dt 1e-3\n").find("missing required key `t_end`") != std::string::npos);
  CHECK(errorOf("dt 1e-3\nt_end 1\nend\n").find("`end` without") != std::string::npos);
  CHECK(errorOf("dt 1e-3\nt_end 1\nbody sphere\n  radius 1\n")
            .find("never closed") != std::string::npos);
  CHECK(errorOf("dt abc\nt_end 1\n").find("cannot parse") != std::string::npos);
  CHECK(errorOf("dt 1e-3\nt_end 1\ncantilever\n  n 5\n  youngs_modulus 10\nend\n")
            .find("dimension 2") != std::string::npos);
}

TEST_CASE("hex packing: row offset, row spacing and minimum distance") {
  const double r = 0.5;
  const auto centers = hexPackingCenters(5, 5, 1, r);
  REQUIRE(centers.size() == 25);
  // row 1 is offset by r in x and sqrt(3) r in y
  CHECK(centers[5].x() == doctest::Approx(r));
  CHECK(centers[5].y() == doctest::Approx(std::sqrt(3.0) * r));
  CHECK(centers[0].x() == doctest::Approx(0.0));

  auto minDist = [](const std::vector<Vec3>& pts) {
    double best = infinity();
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[j] - pts[i]).norm());
    return best;
  };
  CHECK(minDist(centers) >= 2.0 * r - 1e-12);

  const auto stacked = hexPackingCenters(4, 4, 3, r);
  REQUIRE(stacked.size() == 48);
  CHECK(minDist(stacked) >= 2.0 * r - 1e-12);
  CHECK(minDist(stacked) <= 2.0 * r + 1e-12);  // touching, not overlapping
}

TEST_CASE("plate with hole: lattice, removal predicate and bonds") {
  // degenerate hole removes nothing
  const auto full = buildPlateWithHole(10, 10, 1, 0.0, 0.0, 3.015);
  CHECK(full.points.size() == 100);
  CHECK(full.spacing == doctest::Approx(0.1));
  CHECK(full.pointVolume == doctest::Approx(0.1 * 0.1 * 0.01));
  CHECK(full.horizon == doctest::Approx(0.3015));

  // exact predicate oracle at 63 x 63
  const double r1 = 0.2, r2 = 0.1;
  const auto holed = buildPlateWithHole(63, 63, 1, r1, r2, 3.015);
  size_t expected = 0;
  for (int j = 0; j < 63; ++j)
    for (int i = 0; i < 63; ++i) {
      const double x = (i + 0.5) / 63.0, y = (j + 0.5) / 63.0;
      const double ex = (x - 0.5) / r1, ey = (y - 0.5) / r2;
      if (!(ex * ex + ey * ey < 1.0)) ++expected;
    }
  CHECK(holed.points.size() == expected);
  CHECK(holed.points.size() < 63 * 63);

  // every bond respects the horizon and no point is isolated
  for (const auto& b : holed.bonds.bonds) {
    CHECK(b.refLength > 0.0);
    CHECK(b.refLength <= holed.horizon + 1e-12);
  }
  for (const auto& adj : holed.bonds.adjacency) CHECK(!adj.empty());
}

TEST_CASE("cantilever discretization") {
  const auto beam = buildCantilever(11, 1.0, 2.0);
  REQUIRE(beam.points.size() == 11);
  CHECK(beam.spacing == doctest::Approx(0.1));
  REQUIRE(beam.bonds.bonds.size() == 10);
  for (const auto& b : beam.bonds.bonds) {
    CHECK(b.j == b.i + 1);
    CHECK(b.refLength == doctest::Approx(0.1));
  }
  // trapezoidal masses: 0.1 at the ends, 0.2 inside, total 2.0
  CHECK(beam.pointMass.front() == doctest::Approx(0.1));
  CHECK(beam.pointMass.back() == doctest::Approx(0.1));
  CHECK(beam.pointMass[5] == doctest::Approx(0.2));
  double total = 0.0;
  for (double m : beam.pointMass) total += m;
  CHECK(total == doctest::Approx(2.0));

  const auto two = buildCantilever(2, 1.0, 1.0);
  CHECK(two.bonds.bonds.size() == 1);

  // radius mode bonds every pair within the cutoff
  const auto wide = buildCantilever(11, 1.0, 1.0, true, 0.51);
  size_t expected = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = i + 1; j < 11; ++j)
      if ((j - i) * 0.1 <= 0.51) ++expected;
  CHECK(wide.bonds.bonds.size() == expected);
}

TEST_CASE("scenario assembly: ids, duplicates and preflight") {
  const std::string base = "dt 1e-3\nt_end 0.01\ncontact elastic\n kn 10\nend\n";

  // auto ids skip explicitly used ones
  const auto cfg = parseConfig(base +
                               "body sphere\n id 1\n radius 0.4\n position 0 0 0\nend\n"
                               "body sphere\n radius 0.4\n position 2 0 0\nend\n"
                               "body sphere\n radius 0.4\n position 4 0 0\nend\n");
  const auto built = buildScenario<3>(cfg);
  REQUIRE(built.sim->bodies().size() == 3);
  CHECK(built.sim->bodies()[0].id() == 1);
  CHECK(built.sim->bodies()[1].id() == 0);
  CHECK(built.sim->bodies()[2].id() == 2);
  CHECK(built.trackIds == std::vector<int>{0, 1, 2});

  // duplicate ids rejected
  const auto dup = parseConfig(base +
                               "body sphere\n id 3\n radius 0.4\nend\n"
                               "body sphere\n id 3\n radius 0.4\n position 2 0 0\nend\n");
  CHECK_THROWS_AS(buildScenario<3>(dup), SchemaError);

  // initial penetration fails preflight with both ids named
  const auto pen = parseConfig(base +
                               "body sphere\n radius 1\n position 0 0 0\nend\n"
                               "body sphere\n radius 1\n position 1.5 0 0\nend\n");
  try {
    buildScenario<3>(pen);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("initial penetration") != std::string::npos);
    CHECK(msg.find("0") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }

  // unknown tracked id
  const auto badTrack =
      parseConfig(base + "track 7\nbody sphere\n radius 0.4\nend\n");
  CHECK_THROWS_AS(buildScenario<3>(badTrack), SchemaError);

  // hex packing builds with zero initial penetration
  const auto hexCfg = parseConfig(base +
                                  "hex_packing\n rows 5\n cols 5\n radius 0.5\nend\n");
  const auto hexBuilt = buildScenario<3>(hexCfg);
  CHECK(hexBuilt.sim->bodies().size() == 25);
}

TEST_CASE("csv writers: exact headers and 17-digit round trip") {
  TempDir dir("pmech_csv_test");

  writeTimeseriesCsv((dir.path / "empty.csv").string(), {});
  CHECK(slurp(dir.path / "empty.csv") == "t,id,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz\n");

  writeCollectionCsv((dir.path / "cempty.csv").string(), {});
  CHECK(slurp(dir.path / "cempty.csv") == "t,strain,sxx,syy,szz,sxy,sxz,syz,V\n");

  ParticleRecord rec;
  rec.t = 1.0 / 3.0;
  rec.id = 12;
  rec.position = Vec3(std::numbers::pi, -1.2345678901234567e-17, 2.0 / 7.0);
  rec.velocity = Vec3(1e300, -3.0, 0.1);
  rec.orientation = Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5);
  rec.angularVelocity = Vec3(0, 0, -0.7);
  writeTimeseriesCsv((dir.path / "one.csv").string(), {rec});

  std::ifstream in(dir.path / "one.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::vector<std::string> fields;
  std::stringstream ss(row);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 15);
  CHECK(std::strtod(fields[0].c_str(), nullptr) == rec.t);  // bitwise round trip
  CHECK(fields[1] == "12");
  CHECK(std::strtod(fields[2].c_str(), nullptr) == rec.position.x());
  CHECK(std::strtod(fields[3].c_str(), nullptr) == rec.position.y());
  CHECK(std::strtod(fields[5].c_str(), nullptr) == rec.velocity.x());
  CHECK(std::strtod(fields[8].c_str(), nullptr) == rec.orientation.w());
  CHECK(std::strtod(fields[14].c_str(), nullptr) == rec.angularVelocity.z());
}

TEST_CASE("cli exit codes and outputs") {
  TempDir dir("pmech_cli_test");
  const fs::path cfgPath = dir.path / "two_spheres.cfg";
  {
    std::ofstream out(cfgPath);
    out << "dt 1e-3\nt_end 0.05\noutput_interval 0.05\n"
        << "contact elastic\n kn 100\nend\n"
        << "body sphere\n radius 0.5\n position 0 0 0\n velocity 1 0 0\nend\n"
        << "body sphere\n radius 0.5\n position 2 0 0\n velocity -1 0 0\nend\n";
  }
  const std::string outDir = (dir.path / "out").string();

  CHECK(callCli({}) == 1);  // --config is required
  CHECK(callCli({"--config", cfgPath.string(), "--bogus-flag"}) == 1);
  CHECK(callCli({"--config", (dir.path / "missing.cfg").string()}) == 2);

  const fs::path badPath = dir.path / "bad.cfg";
  {
    std::ofstream out(badPath);
    out << "dt -1\nt_end 1\n";
  }
  CHECK(callCli({"--config", badPath.string()}) == 2);

  CHECK(callCli({"--config", cfgPath.string(), "--out", outDir}) == 0);
  CHECK(fs::exists(fs::path(outDir) / "timeseries.csv"));
  CHECK(fs::exists(fs::path(outDir) / "collection.csv"));
  CHECK(fs::exists(fs::path(outDir) / "particles_0.vtk"));
  CHECK(fs::exists(fs::path(outDir) / "particles_1.vtk"));

  // VTK snapshot structure
  const std::string vtk = slurp(fs::path(outDir) / "particles_0.vtk");
  CHECK(vtk.rfind("# vtk DataFile Version 3.0", 0) == 0);
  CHECK(vtk.find("DATASET POLYDATA") != std::string::npos);
  CHECK(vtk.find("POINTS 2 double") != std::string::npos);
  CHECK(vtk.find("VECTORS velocity double") != std::string::npos);
  CHECK(vtk.find("SCALARS body_id int 1") != std::string::npos);
  CHECK(vtk.find("SCALARS broken_bonds int 1") != std::string::npos);

  // timeseries: header plus 2 bodies x 2 output events, rows ordered (t, id)
  std::istringstream ts(slurp(fs::path(outDir) / "timeseries.csv"));
  std::vector<std::string> lines;
  for (std::string l; std::getline(ts, l);) lines.push_back(l);
  REQUIRE(lines.size() == 5);
  CHECK(lines[1].rfind("0,0,", 0) == 0);
  CHECK(lines[2].rfind("0,1,", 0) == 0);

  // identical reruns produce byte-identical outputs
  const std::string outDir2 = (dir.path / "out2").string();
  CHECK(callCli({"--config", cfgPath.string(), "--out", outDir2}) == 0);
  CHECK(slurp(fs::path(outDir) / "timeseries.csv") == slurp(fs::path(outDir2) / "timeseries.csv"));
  CHECK(slurp(fs::path(outDir) / "collection.csv") == slurp(fs::path(outDir2) / "collection.csv"));

  // overrides: --dt must stay positive
  CHECK(callCli({"--config", cfgPath.string(), "--out", outDir, "--t-end", "0.01"}) == 0);
}

TEST_CASE("prism heights draw deterministically from the seeded RNG") {
  const std::string text =
      "dt 1e-3\nt_end 0.01\nseed 42\n"
      "body prism\n sides 6\n circumradius 0.5\n random_height 0.2 0.4 0.8\nend\n"
      "body prism\n sides 6\n circumradius 0.5\n position 3 0 0\n random_height 0.2 0.4 0.8\nend\n";
  const auto cfg = parseConfig(text);
  auto heightsOf = [&]() {
    const auto built = buildScenario<3>(cfg);
    std::vector<double> hs;
    for (const auto& b : built.sim->bodies()) hs.push_back(b.volume());
    return hs;
  };
  const auto a = heightsOf();
  const auto b = heightsOf();
  CHECK(a == b);  // same seed, same draw
}
