#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pmech/scenario.hpp"

namespace pmech {

namespace {

// 17 significant digits: round-trips doubles exactly and is byte-stable
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

}  // namespace

void writeTimeseriesCsv(const std::string& path, const std::vector<ParticleRecord>& rows) {
  auto out = openOut(path);
  out << "t,id,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz\n";
  for (const auto& r : rows) {
    out << num(r.t) << ',' << r.id;
    for (int i = 0; i < 3; ++i) out << ',' << num(r.position[i]);
    for (int i = 0; i < 3; ++i) out << ',' << num(r.velocity[i]);
    out << ',' << num(r.orientation.w()) << ',' << num(r.orientation.x()) << ','
        << num(r.orientation.y()) << ',' << num(r.orientation.z());
    for (int i = 0; i < 3; ++i) out << ',' << num(r.angularVelocity[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void writeCollectionCsv(const std::string& path, const std::vector<CollectionRecord>& rows) {
  auto out = openOut(path);
  out << "t,strain,sxx,syy,szz,sxy,sxz,syz,V\n";
  for (const auto& r : rows) {
    out << num(r.t) << ',' << num(r.strain) << ',' << num(r.stress(0, 0)) << ','
        << num(r.stress(1, 1)) << ',' << num(r.stress(2, 2)) << ',' << num(r.stress(0, 1)) << ','
        << num(r.stress(0, 2)) << ',' << num(r.stress(1, 2)) << ',' << num(r.volume) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

template <int D>
void writeVtkSnapshot(const std::string& path, const Simulation<D>& sim,
                      const std::vector<int>& brokenCounts) {
  std::vector<int> bounded;
  for (int i = 0; i < static_cast<int>(sim.bodies().size()); ++i)
    if (!std::isinf(sim.bodies()[i].shape()->boundingRadius())) bounded.push_back(i);

  auto out = openOut(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "particle snapshot t=" << num(sim.time()) << "\n";
  out << "ASCII\nDATASET POLYDATA\n";
  out << "POINTS " << bounded.size() << " double\n";
  for (int i : bounded) {
    Vec3 p = Vec3::Zero();
    p.template head<D>() = sim.bodies()[i].pose().center;
    out << num(p.x()) << ' ' << num(p.y()) << ' ' << num(p.z()) << '\n';
  }
  out << "VERTICES " << bounded.size() << ' ' << 2 * bounded.size() << '\n';
  for (size_t k = 0; k < bounded.size(); ++k) out << "1 " << k << '\n';

  out << "POINT_DATA " << bounded.size() << '\n';
  out << "VECTORS velocity double\n";
  for (int i : bounded) {
    Vec3 v = Vec3::Zero();
    v.template head<D>() = sim.bodies()[i].velocity();
    out << num(v.x()) << ' ' << num(v.y()) << ' ' << num(v.z()) << '\n';
  }
  out << "VECTORS angular_velocity double\n";
  for (int i : bounded) {
    Vec3 w = Vec3::Zero();
    if constexpr (D == 2)
      w.z() = sim.bodies()[i].angularVelocity();
    else
      w = sim.bodies()[i].angularVelocity();
    out << num(w.x()) << ' ' << num(w.y()) << ' ' << num(w.z()) << '\n';
  }
  out << "SCALARS body_id int 1\nLOOKUP_TABLE default\n";
  for (int i : bounded) out << sim.bodies()[i].id() << '\n';
  out << "SCALARS broken_bonds int 1\nLOOKUP_TABLE default\n";
  for (int i : bounded) out << (i < static_cast<int>(brokenCounts.size()) ? brokenCounts[i] : 0)
                            << '\n';
  if (!out) throw IoError("write failed: " + path);
}

template void writeVtkSnapshot<2>(const std::string&, const Simulation<2>&,
                                  const std::vector<int>&);
template void writeVtkSnapshot<3>(const std::string&, const Simulation<3>&,
                                  const std::vector<int>&);

// ---- RunWriter -----------------------------------------------------------------------

template <int D>
RunWriter<D>::RunWriter(std::string directory, std::vector<int> trackIds, StrainSpec strain)
    : directory_(std::move(directory)), trackIds_(std::move(trackIds)), strain_(strain) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) throw IoError("cannot create output directory: " + directory_);
}

template <int D>
void RunWriter<D>::observe(const Simulation<D>& sim, double t) {
  if (initialBonds_.empty()) initialBonds_ = sim.bondCounts();

  for (int id : trackIds_) particleRows_.push_back(particleSnapshot(sim, id, t));

  CollectionRecord col;
  col.t = t;
  try {
    const auto res = homogenizedCauchyStress(sim);
    col.stress.topLeftCorner(D, D) = res.stress;
    col.volume = res.volume;
  } catch (const EmptyCollection&) {
    // wall-only collections report zeros
  }
  if (strain_.body >= 0)
    col.strain = strainProxy(sim, strain_.body, strain_.axis, strain_.ref, strain_.length);
  collectionRows_.push_back(col);

  std::vector<int> broken = sim.bondCounts();
  for (size_t i = 0; i < broken.size() && i < initialBonds_.size(); ++i)
    broken[i] = initialBonds_[i] - broken[i];
  writeVtkSnapshot(directory_ + "/particles_" + std::to_string(outputIndex_) + ".vtk", sim,
                   broken);
  ++outputIndex_;
}

template <int D>
void RunWriter<D>::flush() const {
  writeTimeseriesCsv(directory_ + "/timeseries.csv", particleRows_);
  writeCollectionCsv(directory_ + "/collection.csv", collectionRows_);
}

template class RunWriter<2>;
template class RunWriter<3>;

// ---- CLI -----------------------------------------------------------------------------

namespace {

template <int D>
int runScenario(const ScenarioConfig& cfg, const std::string& outDir, bool verbose) {
  BuiltScenario<D> built = buildScenario<D>(cfg);
  built.sim->setVerbose(verbose);

  RunWriter<D> writer(outDir, built.trackIds, built.strain);
  built.sim->addObserver(
      [&writer](const Simulation<D>& sim, double t) { writer.observe(sim, t); });
  if (verbose) {
    built.sim->addObserver([](const Simulation<D>& sim, double t) {
      std::cerr << "t=" << t << " bodies=" << sim.bodies().size()
                << " contacts=" << sim.pairRecords().size() << '\n';
    });
  }
  built.sim->run(built.plan);
  writer.flush();
  return 0;
}

}  // namespace

int runCli(int argc, char** argv) {
  CLI::App app{"SDF-particle discrete element / peridynamics simulator"};
  std::string configPath, outDir;
  double dt = -1.0, tEnd = -1.0;
  long seed = -1;
  int threads = 0;
  bool verbose = false;
  app.add_option("--config", configPath, "scenario config file")->required();
  app.add_option("--out", outDir, "output directory");
  app.add_option("--dt", dt, "override time step");
  app.add_option("--t-end", tEnd, "override end time");
  app.add_option("--seed", seed, "override RNG seed");
  app.add_option("--threads", threads, "worker thread count");
  app.add_flag("--verbose", verbose, "progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }

  std::ifstream in(configPath);
  if (!in) {
    std::cerr << "cannot read config file: " << configPath << '\n';
    return 2;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  ScenarioConfig cfg;
  try {
    cfg = parseConfig(buffer.str());
    if (dt > 0.0) cfg.plan.dt = dt;
    if (tEnd >= 0.0) cfg.plan.tEnd = tEnd;
    if (seed >= 0) cfg.seed = static_cast<unsigned long>(seed);
    if (threads > 0) cfg.threads = threads;
    if (!outDir.empty()) cfg.outDir = outDir;
    if (cfg.outDir.empty()) cfg.outDir = "out";
  } catch (const SchemaError& e) {
    std::cerr << "config error:\n" << e.what();
    return 2;
  }

  try {
    if (cfg.dimension == 2) return runScenario<2>(cfg, cfg.outDir, verbose);
    return runScenario<3>(cfg, cfg.outDir, verbose);
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace pmech
