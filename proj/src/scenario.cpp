#include "pmech/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pmech/geometry.hpp"

namespace pmech {

namespace {

// ---- low-level parsing -----------------------------------------------------------

struct Entry {
  int line = 0;
  std::string key;
  std::vector<std::string> args;
};

struct Section {
  int line = 0;
  std::string kind;
  std::string arg;
  std::vector<Entry> entries;
};

struct Diagnostics {
  std::vector<std::string> errors;

  void add(int line, const std::string& msg) {
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  }
  void raiseIfAny() const {
    if (errors.empty()) return;
    std::string all;
    for (const auto& e : errors) {
      all += e;
      all += '\n';
    }
    throw SchemaError(all);
  }
};

int editDistance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  int bestDist = 4;  // only suggest close matches
  for (const auto& c : candidates) {
    const int d = editDistance(key, c);
    if (d < bestDist) {
      bestDist = d;
      best = c;
    }
  }
  return best;
}

void unknownKey(Diagnostics& diag, const Entry& e, const std::string& scope,
                const std::vector<std::string>& allowed) {
  std::string msg = "unknown key `" + e.key + "` in " + scope;
  const std::string s = suggest(e.key, allowed);
  if (!s.empty()) msg += "; did you mean `" + s + "`?";
  diag.add(e.line, msg);
}

bool parseDouble(Diagnostics& diag, const Entry& e, size_t idx, double& out) {
  if (idx >= e.args.size()) {
    diag.add(e.line, "`" + e.key + "` expects a number");
    return false;
  }
  char* end = nullptr;
  out = std::strtod(e.args[idx].c_str(), &end);
  if (end == e.args[idx].c_str() || *end != '\0') {
    diag.add(e.line, "`" + e.key + "`: cannot parse `" + e.args[idx] + "` as a number");
    return false;
  }
  return true;
}

bool parseInt(Diagnostics& diag, const Entry& e, size_t idx, long& out) {
  if (idx >= e.args.size()) {
    diag.add(e.line, "`" + e.key + "` expects an integer");
    return false;
  }
  char* end = nullptr;
  out = std::strtol(e.args[idx].c_str(), &end, 10);
  if (end == e.args[idx].c_str() || *end != '\0') {
    diag.add(e.line, "`" + e.key + "`: cannot parse `" + e.args[idx] + "` as an integer");
    return false;
  }
  return true;
}

// up to three components; missing trailing components stay zero (2-D configs)
bool parseVec(Diagnostics& diag, const Entry& e, Vec3& out) {
  if (e.args.empty() || e.args.size() > 3) {
    diag.add(e.line, "`" + e.key + "` expects 1-3 numbers");
    return false;
  }
  out = Vec3::Zero();
  for (size_t i = 0; i < e.args.size(); ++i)
    if (!parseDouble(diag, e, i, out[static_cast<int>(i)])) return false;
  return true;
}

const std::set<std::string> kSectionKinds = {"contact",         "body", "hex_packing",
                                             "plate_with_hole", "grow", "cantilever"};

std::pair<std::vector<Entry>, std::vector<Section>> tokenize(const std::string& text,
                                                             Diagnostics& diag) {
  std::vector<Entry> top;
  std::vector<Section> sections;
  Section* open = nullptr;

  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;

    if (tokens[0] == "end") {
      if (!open)
        diag.add(lineNo, "`end` without an open section");
      else
        open = nullptr;
      continue;
    }
    // `body` doubles as the grow section's key for the target body id
    const bool growBodyKey = open && open->kind == "grow" && tokens[0] == "body";
    if (kSectionKinds.count(tokens[0]) && !growBodyKey) {
      if (open) {
        diag.add(lineNo, "section `" + tokens[0] + "` opened before closing `" + open->kind + "`");
        open = nullptr;
      }
      Section s;
      s.line = lineNo;
      s.kind = tokens[0];
      if (tokens.size() > 1) s.arg = tokens[1];
      sections.push_back(std::move(s));
      open = &sections.back();
      continue;
    }
    Entry e;
    e.line = lineNo;
    e.key = tokens[0];
    e.args.assign(tokens.begin() + 1, tokens.end());
    if (open)
      open->entries.push_back(std::move(e));
    else
      top.push_back(std::move(e));
  }
  if (open) diag.add(lineNo, "section `" + open->kind + "` never closed with `end`");
  return {std::move(top), std::move(sections)};
}

// ---- section interpreters ----------------------------------------------------------

void readTopLevel(const std::vector<Entry>& top, ScenarioConfig& cfg, Diagnostics& diag) {
  const std::vector<std::string> allowed = {
      "dimension", "dt",    "t_end", "output_interval", "seed",        "threads",
      "gravity",   "track", "out",   "strain_body",     "strain_axis", "strain_ref",
      "strain_length"};
  bool haveDt = false, haveTEnd = false;
  for (const auto& e : top) {
    long l = 0;
    double d = 0.0;
    if (e.key == "dimension") {
      if (parseInt(diag, e, 0, l)) {
        if (l != 2 && l != 3)
          diag.add(e.line, "`dimension` must be 2 or 3");
        else
          cfg.dimension = static_cast<int>(l);
      }
    } else if (e.key == "dt") {
      if (parseDouble(diag, e, 0, d)) {
        if (!(d > 0.0))
          diag.add(e.line, "`dt` must be positive");
        else {
          cfg.plan.dt = d;
          haveDt = true;
        }
      }
    } else if (e.key == "t_end") {
      if (parseDouble(diag, e, 0, d)) {
        if (d < 0.0)
          diag.add(e.line, "`t_end` must be non-negative");
        else {
          cfg.plan.tEnd = d;
          haveTEnd = true;
        }
      }
    } else if (e.key == "output_interval") {
      if (parseDouble(diag, e, 0, d)) cfg.plan.outputInterval = d;
    } else if (e.key == "seed") {
      if (parseInt(diag, e, 0, l)) cfg.seed = static_cast<unsigned long>(l);
    } else if (e.key == "threads") {
      if (parseInt(diag, e, 0, l)) cfg.threads = std::max(1, static_cast<int>(l));
    } else if (e.key == "gravity") {
      parseVec(diag, e, cfg.gravity);
    } else if (e.key == "out") {
      if (e.args.size() == 1)
        cfg.outDir = e.args[0];
      else
        diag.add(e.line, "`out` expects one path");
    } else if (e.key == "track") {
      if (e.args.size() == 1 && e.args[0] == "all") {
        cfg.trackAll = true;
      } else {
        cfg.trackAll = false;
        for (size_t i = 0; i < e.args.size(); ++i)
          if (parseInt(diag, e, i, l)) cfg.trackIds.push_back(static_cast<int>(l));
      }
    } else if (e.key == "strain_body") {
      if (parseInt(diag, e, 0, l)) cfg.strain.body = static_cast<int>(l);
    } else if (e.key == "strain_axis") {
      if (parseInt(diag, e, 0, l)) cfg.strain.axis = static_cast<int>(l);
    } else if (e.key == "strain_ref") {
      if (parseDouble(diag, e, 0, d)) cfg.strain.ref = d;
    } else if (e.key == "strain_length") {
      if (parseDouble(diag, e, 0, d)) cfg.strain.length = d;
    } else {
      unknownKey(diag, e, "top level", allowed);
    }
  }
  if (!haveDt) diag.add(0, "missing required key `dt`");
  if (!haveTEnd) diag.add(0, "missing required key `t_end`");
}

void readContact(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  if (s.arg != "elastic" && s.arg != "viscoelastic") {
    diag.add(s.line, "contact law must be `elastic` or `viscoelastic`");
    return;
  }
  cfg.hasContact = true;
  cfg.contact.viscous = s.arg == "viscoelastic";
  const std::vector<std::string> allowed = {"kn", "ks", "mu", "gamma_n", "gamma_s"};
  for (const auto& e : s.entries) {
    double d = 0.0;
    if (e.key == "kn") {
      if (parseDouble(diag, e, 0, d)) cfg.contact.kn = d;
    } else if (e.key == "ks") {
      if (parseDouble(diag, e, 0, d)) cfg.contact.ks = d;
    } else if (e.key == "mu") {
      if (parseDouble(diag, e, 0, d)) cfg.contact.mu = d;
    } else if (e.key == "gamma_n") {
      if (parseDouble(diag, e, 0, d)) cfg.contact.gammaN = d;
    } else if (e.key == "gamma_s") {
      if (parseDouble(diag, e, 0, d)) cfg.contact.gammaS = d;
    } else {
      unknownKey(diag, e, "contact section", allowed);
    }
  }
  if (!cfg.contact.viscous && (cfg.contact.gammaN != 0.0 || cfg.contact.gammaS != 0.0))
    diag.add(s.line, "elastic contact does not take gamma_n/gamma_s");
}

void readBody(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  BodySpec b;
  if (s.arg == "sphere")
    b.kind = BodySpec::Kind::Sphere;
  else if (s.arg == "box")
    b.kind = BodySpec::Kind::Box;
  else if (s.arg == "wall")
    b.kind = BodySpec::Kind::Wall;
  else if (s.arg == "polygon")
    b.kind = BodySpec::Kind::Polygon;
  else if (s.arg == "prism")
    b.kind = BodySpec::Kind::Prism;
  else {
    diag.add(s.line, "body kind must be sphere, box, wall, polygon or prism");
    return;
  }
  const std::vector<std::string> allowed = {
      "id",       "radius",   "extents",          "normal",      "offset",
      "vertex",   "sides",    "circumradius",     "height",      "random_height",
      "density",  "position", "velocity",         "angular_velocity",
      "orientation", "fixed"};
  for (const auto& e : s.entries) {
    long l = 0;
    double d = 0.0;
    Vec3 v = Vec3::Zero();
    if (e.key == "id") {
      if (parseInt(diag, e, 0, l)) b.id = static_cast<int>(l);
    } else if (e.key == "radius") {
      if (parseDouble(diag, e, 0, d)) b.radius = d;
    } else if (e.key == "extents") {
      if (parseVec(diag, e, v)) b.extents = v;
    } else if (e.key == "normal") {
      if (parseVec(diag, e, v)) b.normal = v;
    } else if (e.key == "offset") {
      if (parseDouble(diag, e, 0, d)) b.offset = d;
    } else if (e.key == "vertex") {
      double x = 0.0, y = 0.0;
      if (parseDouble(diag, e, 0, x) && parseDouble(diag, e, 1, y)) b.polygon.emplace_back(x, y);
    } else if (e.key == "sides") {
      if (parseInt(diag, e, 0, l)) b.sides = static_cast<int>(l);
    } else if (e.key == "circumradius") {
      if (parseDouble(diag, e, 0, d)) b.circumradius = d;
    } else if (e.key == "height") {
      if (parseDouble(diag, e, 0, d)) b.height = d;
    } else if (e.key == "random_height") {
      for (size_t i = 0; i < e.args.size(); ++i)
        if (parseDouble(diag, e, i, d)) b.randomHeights.push_back(d);
      if (b.randomHeights.empty()) diag.add(e.line, "`random_height` expects at least one value");
    } else if (e.key == "density") {
      if (parseDouble(diag, e, 0, d)) b.density = d;
    } else if (e.key == "position") {
      if (parseVec(diag, e, v)) b.position = v;
    } else if (e.key == "velocity") {
      if (parseVec(diag, e, v)) b.velocity = v;
    } else if (e.key == "angular_velocity") {
      if (parseVec(diag, e, v)) b.angularVelocity = v;
    } else if (e.key == "orientation") {
      // 2-D: `orientation ANGLE`; 3-D: `orientation AX AY AZ ANGLE`
      if (e.args.size() == 1) {
        if (parseDouble(diag, e, 0, d)) b.orientationAngle = d;
      } else if (e.args.size() == 4) {
        bool ok = true;
        for (int i = 0; i < 3; ++i) ok = ok && parseDouble(diag, e, i, b.orientationAxis[i]);
        if (ok && parseDouble(diag, e, 3, d)) b.orientationAngle = d;
      } else {
        diag.add(e.line, "`orientation` expects ANGLE (2-D) or AX AY AZ ANGLE (3-D)");
      }
    } else if (e.key == "fixed") {
      b.fixed = true;
    } else {
      unknownKey(diag, e, "body section", allowed);
    }
  }
  switch (b.kind) {
    case BodySpec::Kind::Sphere:
      if (!(b.radius > 0.0)) diag.add(s.line, "sphere body requires a positive `radius`");
      break;
    case BodySpec::Kind::Box:
      if (!(b.extents.minCoeff() > 0.0) && !(b.extents.head<2>().minCoeff() > 0.0))
        diag.add(s.line, "box body requires positive `extents`");
      break;
    case BodySpec::Kind::Wall:
      if (b.normal.norm() == 0.0) diag.add(s.line, "wall body requires a nonzero `normal`");
      b.fixed = true;
      break;
    case BodySpec::Kind::Polygon:
      if (b.polygon.size() < 3 && b.sides < 3)
        diag.add(s.line, "polygon body requires >= 3 `vertex` lines or `sides`");
      break;
    case BodySpec::Kind::Prism:
      if (b.polygon.size() < 3 && b.sides < 3)
        diag.add(s.line, "prism body requires a base polygon (`vertex` lines or `sides`)");
      if (!(b.height > 0.0) && b.randomHeights.empty())
        diag.add(s.line, "prism body requires `height` or `random_height`");
      break;
  }
  cfg.bodies.push_back(std::move(b));
}

void readHexPacking(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  HexPackingSpec h;
  const std::vector<std::string> allowed = {"rows", "cols", "layers", "radius", "density", "origin"};
  for (const auto& e : s.entries) {
    long l = 0;
    double d = 0.0;
    if (e.key == "rows") {
      if (parseInt(diag, e, 0, l)) h.rows = static_cast<int>(l);
    } else if (e.key == "cols") {
      if (parseInt(diag, e, 0, l)) h.cols = static_cast<int>(l);
    } else if (e.key == "layers") {
      if (parseInt(diag, e, 0, l)) h.layers = static_cast<int>(l);
    } else if (e.key == "radius") {
      if (parseDouble(diag, e, 0, d)) h.radius = d;
    } else if (e.key == "density") {
      if (parseDouble(diag, e, 0, d)) h.density = d;
    } else if (e.key == "origin") {
      parseVec(diag, e, h.origin);
    } else {
      unknownKey(diag, e, "hex_packing section", allowed);
    }
  }
  if (h.rows < 1 || h.cols < 1 || h.layers < 1)
    diag.add(s.line, "hex_packing counts must be positive");
  if (!(h.radius > 0.0)) diag.add(s.line, "hex_packing requires a positive `radius`");
  cfg.hexPackings.push_back(h);
}

void readGrow(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  GrowSpec g;
  const std::vector<std::string> allowed = {"body", "rate"};
  for (const auto& e : s.entries) {
    long l = 0;
    double d = 0.0;
    if (e.key == "body") {
      if (parseInt(diag, e, 0, l)) g.body = static_cast<int>(l);
    } else if (e.key == "rate") {
      if (parseDouble(diag, e, 0, d)) g.rate = d;
    } else {
      unknownKey(diag, e, "grow section", allowed);
    }
  }
  if (g.body < 0) diag.add(s.line, "grow section requires `body`");
  cfg.grows.push_back(g);
}

void readPlate(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  PlateSpec p;
  const std::vector<std::string> allowed = {
      "nx", "ny", "nz", "r1", "r2", "horizon_factor", "bulk_modulus", "shear_modulus",
      "critical_stretch", "density", "force_scale", "ramp_rate", "strip", "thickness"};
  for (const auto& e : s.entries) {
    long l = 0;
    double d = 0.0;
    if (e.key == "nx") {
      if (parseInt(diag, e, 0, l)) p.nx = static_cast<int>(l);
    } else if (e.key == "ny") {
      if (parseInt(diag, e, 0, l)) p.ny = static_cast<int>(l);
    } else if (e.key == "nz") {
      if (parseInt(diag, e, 0, l)) p.nz = static_cast<int>(l);
    } else if (e.key == "r1") {
      if (parseDouble(diag, e, 0, d)) p.r1 = d;
    } else if (e.key == "r2") {
      if (parseDouble(diag, e, 0, d)) p.r2 = d;
    } else if (e.key == "horizon_factor") {
      if (parseDouble(diag, e, 0, d)) p.horizonFactor = d;
    } else if (e.key == "bulk_modulus") {
      if (parseDouble(diag, e, 0, d)) p.bulkModulus = d;
    } else if (e.key == "shear_modulus") {
      if (parseDouble(diag, e, 0, d)) p.shearModulus = d;
    } else if (e.key == "critical_stretch") {
      if (parseDouble(diag, e, 0, d)) p.criticalStretch = d;
    } else if (e.key == "density") {
      if (parseDouble(diag, e, 0, d)) p.density = d;
    } else if (e.key == "force_scale") {
      if (parseDouble(diag, e, 0, d)) p.forceScale = d;
    } else if (e.key == "ramp_rate") {
      if (parseDouble(diag, e, 0, d)) p.rampRate = d;
    } else if (e.key == "strip") {
      if (parseDouble(diag, e, 0, d)) p.strip = d;
    } else if (e.key == "thickness") {
      if (parseDouble(diag, e, 0, d)) p.thickness = d;
    } else {
      unknownKey(diag, e, "plate_with_hole section", allowed);
    }
  }
  if (p.nx < 2 || p.ny < 2 || p.nz < 1) diag.add(s.line, "plate_with_hole requires nx,ny >= 2");
  if (!(p.bulkModulus > 0.0) || !(p.shearModulus > 0.0))
    diag.add(s.line, "plate_with_hole requires positive moduli");
  cfg.plates.push_back(p);
}

void readCantilever(const Section& s, ScenarioConfig& cfg, Diagnostics& diag) {
  CantileverSpec c;
  const std::vector<std::string> allowed = {"n",          "length", "youngs_modulus",
                                            "second_moment", "area", "total_mass",
                                            "accel",      "damping", "mode", "bond_radius"};
  for (const auto& e : s.entries) {
    long l = 0;
    double d = 0.0;
    if (e.key == "n") {
      if (parseInt(diag, e, 0, l)) c.n = static_cast<int>(l);
    } else if (e.key == "length") {
      if (parseDouble(diag, e, 0, d)) c.length = d;
    } else if (e.key == "youngs_modulus") {
      if (parseDouble(diag, e, 0, d)) c.youngsModulus = d;
    } else if (e.key == "second_moment") {
      if (parseDouble(diag, e, 0, d)) c.secondMoment = d;
    } else if (e.key == "area") {
      if (parseDouble(diag, e, 0, d)) c.area = d;
    } else if (e.key == "total_mass") {
      if (parseDouble(diag, e, 0, d)) c.totalMass = d;
    } else if (e.key == "accel") {
      if (parseDouble(diag, e, 0, d)) c.accel = d;
    } else if (e.key == "damping") {
      if (parseDouble(diag, e, 0, d)) c.damping = d;
    } else if (e.key == "mode") {
      if (e.args.size() == 1 && (e.args[0] == "adjacent" || e.args[0] == "radius"))
        c.radiusMode = e.args[0] == "radius";
      else
        diag.add(e.line, "`mode` must be `adjacent` or `radius`");
    } else if (e.key == "bond_radius") {
      if (parseDouble(diag, e, 0, d)) c.bondRadius = d;
    } else {
      unknownKey(diag, e, "cantilever section", allowed);
    }
  }
  if (c.n < 2) diag.add(s.line, "cantilever requires n >= 2");
  if (!(c.youngsModulus > 0.0)) diag.add(s.line, "cantilever requires a positive `youngs_modulus`");
  if (c.radiusMode && !(c.bondRadius > 0.0))
    diag.add(s.line, "cantilever radius mode requires a positive `bond_radius`");
  cfg.cantilevers.push_back(c);
}

}  // namespace

ScenarioConfig parseConfig(const std::string& text) {
  Diagnostics diag;
  auto [top, sections] = tokenize(text, diag);

  ScenarioConfig cfg;
  readTopLevel(top, cfg, diag);
  for (const auto& s : sections) {
    if (s.kind == "contact")
      readContact(s, cfg, diag);
    else if (s.kind == "body")
      readBody(s, cfg, diag);
    else if (s.kind == "hex_packing")
      readHexPacking(s, cfg, diag);
    else if (s.kind == "grow")
      readGrow(s, cfg, diag);
    else if (s.kind == "plate_with_hole")
      readPlate(s, cfg, diag);
    else if (s.kind == "cantilever")
      readCantilever(s, cfg, diag);
  }
  if (cfg.dimension == 2 && !cfg.plates.empty())
    diag.add(0, "plate_with_hole requires `dimension 3`");
  if (cfg.dimension == 3 && !cfg.cantilevers.empty())
    diag.add(0, "cantilever requires `dimension 2`");
  diag.raiseIfAny();
  return cfg;
}

// ---- builders ----------------------------------------------------------------------

std::vector<Vec3> hexPackingCenters(int rows, int cols, int layers, double radius) {
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(rows) * cols * layers);
  const double r = radius;
  for (int layer = 0; layer < layers; ++layer) {
    const bool oddLayer = layer % 2 != 0;
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        // HCP: odd rows shift by r in x; odd layers shift by (r, r/sqrt(3))
        double x = 2.0 * r * col + (row % 2 != 0 ? r : 0.0);
        double y = std::sqrt(3.0) * r * row;
        if (oddLayer) {
          x += r;
          y += r / std::sqrt(3.0);
        }
        const double z = 2.0 * std::sqrt(6.0) / 3.0 * r * layer;
        out.emplace_back(x, y, z);
      }
    }
  }
  return out;
}

PlateWithHole buildPlateWithHole(int nx, int ny, int nz, double r1, double r2,
                                 double horizonFactor, double thickness) {
  PlateWithHole out;
  const double dx = 1.0 / nx;
  const double dy = 1.0 / ny;
  const double dz = thickness / nz;
  out.spacing = dx;
  out.pointVolume = dx * dy * dz;
  out.horizon = horizonFactor * dx;

  const bool hasHole = r1 > 0.0 && r2 > 0.0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double x = (i + 0.5) * dx;
        const double y = (j + 0.5) * dy;
        const double z = (k + 0.5) * dz;
        if (hasHole) {
          const double ex = (x - 0.5) / r1;
          const double ey = (y - 0.5) / r2;
          if (ex * ex + ey * ey < 1.0) continue;
        }
        out.points.emplace_back(x, y, z);
      }
    }
  }
  out.bonds = buildHorizon<3>(out.points, out.horizon, out.pointVolume);
  return out;
}

CantileverBuild buildCantilever(int n, double length, double totalMass, bool radiusMode,
                                double bondRadius) {
  CantileverBuild out;
  out.spacing = length / (n - 1);
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) out.points.emplace_back(i * out.spacing, 0.0);

  // trapezoidal mass lumping: half weight at the ends
  out.pointMass.assign(n, totalMass / (n - 1));
  out.pointMass.front() *= 0.5;
  out.pointMass.back() *= 0.5;

  const double cutoff = radiusMode ? bondRadius : out.spacing * 1.0001;
  out.bonds = buildHorizon<2>(out.points, cutoff, 1.0);
  return out;
}

// ---- scenario assembly ----------------------------------------------------------------

namespace {

template <int D>
Vec<D> headVec(const Vec3& v) {
  return v.template head<D>();
}

std::shared_ptr<ConvexPolygonShape> basePolygon(const BodySpec& spec) {
  if (!spec.polygon.empty()) return std::make_shared<ConvexPolygonShape>(spec.polygon);
  return makeRegularPolygon(spec.sides, spec.circumradius);
}

template <int D>
ShapePtr<D> makeShape(const BodySpec& spec, std::mt19937_64& rng) {
  switch (spec.kind) {
    case BodySpec::Kind::Sphere:
      return std::make_shared<SphereShape<D>>(spec.radius);
    case BodySpec::Kind::Box:
      return std::make_shared<BoxShape<D>>(headVec<D>(spec.extents));
    case BodySpec::Kind::Wall: {
      Vec<D> n = headVec<D>(spec.normal);
      const double len = n.norm();
      if (len == 0.0) throw SchemaError("wall normal is zero");
      return std::make_shared<HalfSpaceShape<D>>(Vec<D>(n / len), spec.offset);
    }
    case BodySpec::Kind::Polygon:
      if constexpr (D == 2)
        return basePolygon(spec);
      else
        throw SchemaError("polygon bodies require `dimension 2`");
    case BodySpec::Kind::Prism:
      if constexpr (D == 3) {
        double height = spec.height;
        if (!spec.randomHeights.empty())
          height = spec.randomHeights[rng() % spec.randomHeights.size()];
        const auto base = basePolygon(spec);
        return makeExtrudedPolygon(base->vertices(), height);
      } else {
        throw SchemaError("prism bodies require `dimension 3`");
      }
  }
  throw SchemaError("unreachable body kind");
}

template <int D>
Pose<D> makePose(const BodySpec& spec) {
  Pose<D> pose;
  pose.center = headVec<D>(spec.position);
  if constexpr (D == 2) {
    pose.orientation = spec.orientationAngle;
  } else {
    if (spec.orientationAngle != 0.0) {
      const Vec3 axis = spec.orientationAxis.normalized();
      pose.orientation = quaternionFromAxisAngle(axis, spec.orientationAngle);
    }
  }
  return pose;
}

template <int D>
void setAngular(RigidBody<D>& body, const Vec3& w) {
  if constexpr (D == 2)
    body.angularVelocity() = w.z();
  else
    body.angularVelocity() = w;
}

template <int D>
void addGravity(RigidBody<D>& body, const Vec<D>& g) {
  if (body.fixed() || g.norm() == 0.0) return;
  body.bodyForces().push_back([g](const RigidBody<D>& b, double) {
    return std::make_pair(Vec<D>(b.mass() * g), Kinematics<D>::zeroAngular());
  });
}

template <int D>
void preflight(Simulation<D>& sim) {
  sim.primeForces();
  double maxR = 0.0;
  for (const auto& b : sim.bodies()) {
    const double r = b.shape()->boundingRadius();
    if (!std::isinf(r)) maxR = std::max(maxR, r);
  }
  for (const auto& rec : sim.pairRecords()) {
    if (rec.summary.depth > 1e-9 * maxR)
      throw SchemaError("initial penetration between bodies " +
                        std::to_string(sim.bodies()[rec.i].id()) + " and " +
                        std::to_string(sim.bodies()[rec.j].id()));
  }
}

}  // namespace

template <int D>
BuiltScenario<D> buildScenario(const ScenarioConfig& cfg) {
  BuiltScenario<D> out;
  out.plan = cfg.plan;
  out.strain = cfg.strain;
  out.sim = std::make_unique<Simulation<D>>();
  Simulation<D>& sim = *out.sim;
  sim.setThreads(cfg.threads);

  std::mt19937_64 rng(cfg.seed);
  std::set<int> usedIds;
  int nextId = 0;
  auto claimId = [&](int wanted) {
    int id = wanted;
    if (id < 0) {
      while (usedIds.count(nextId)) ++nextId;
      id = nextId;
    }
    if (!usedIds.insert(id).second)
      throw SchemaError("duplicate body id " + std::to_string(id));
    return id;
  };
  const Vec<D> gravity = headVec<D>(cfg.gravity);

  // explicit bodies
  for (const auto& spec : cfg.bodies) {
    const int id = claimId(spec.id);
    const auto shape = makeShape<D>(spec, rng);
    const Pose<D> pose = makePose<D>(spec);
    if (spec.fixed) {
      sim.addBody(RigidBody<D>::fixedBody(id, shape, pose, headVec<D>(spec.velocity)));
    } else {
      RigidBody<D> body(id, shape, spec.density, pose);
      body.velocity() = headVec<D>(spec.velocity);
      setAngular(body, spec.angularVelocity);
      addGravity(body, gravity);
      sim.addBody(std::move(body));
    }
  }

  // hex packings
  for (const auto& h : cfg.hexPackings) {
    const auto centers = hexPackingCenters(h.rows, h.cols, h.layers, h.radius);
    const auto shape = std::make_shared<SphereShape<D>>(h.radius);
    for (const auto& c : centers) {
      Pose<D> pose;
      pose.center = headVec<D>(Vec3(h.origin + c));
      RigidBody<D> body(claimId(-1), shape, h.density, pose);
      addGravity(body, gravity);
      sim.addBody(std::move(body));
    }
  }

  // peridynamic plates
  if constexpr (D == 3) {
    for (const auto& p : cfg.plates) {
      const auto plate = buildPlateWithHole(p.nx, p.ny, p.nz, p.r1, p.r2, p.horizonFactor,
                                            p.thickness);
      const auto shape = std::make_shared<BoxShape<3>>(
          Vec3(1.0 / p.nx, 1.0 / p.ny, p.thickness / p.nz));
      PeridynamicBlock<3> block;
      block.model = PeridynamicBlock<3>::Model::LinearSolid;
      block.refPositions = plate.points;
      block.bondSet = plate.bonds;
      block.solid = {p.bulkModulus, p.shearModulus, plate.horizon, p.criticalStretch,
                     plate.pointVolume, p.density};
      const double d4 = std::pow(plate.horizon, 4);
      block.handoff.kn = 18.0 * p.bulkModulus / (std::numbers::pi * d4) * plate.pointVolume *
                         plate.pointVolume;
      block.fractureEnabled = true;
      for (const auto& x : plate.points) {
        Pose<3> pose;
        pose.center = x;
        RigidBody<3> body(claimId(-1), shape, p.density, pose);
        addGravity(body, gravity);
        // driven strips: outward ramped body-force density +-beta(t) e_x
        const double mag = p.forceScale * plate.pointVolume;
        double sign = 0.0;
        if (x.x() > 1.0 - p.strip) sign = 1.0;
        if (x.x() < p.strip) sign = -1.0;
        if (sign != 0.0) {
          const double rate = p.rampRate;
          body.bodyForces().push_back([sign, mag, rate](const RigidBody<3>&, double t) {
            return std::make_pair(Vec3(sign * mag * (1.0 - std::exp(-rate * t)), 0.0, 0.0),
                                  Vec3::Zero());
          });
        }
        block.bodyIndex.push_back(sim.addBody(std::move(body)));
      }
      sim.addPeridynamicBlock(std::move(block));
    }
  }

  // cantilever beams
  if constexpr (D == 2) {
    for (const auto& c : cfg.cantilevers) {
      const auto beam = buildCantilever(c.n, c.length, c.totalMass, c.radiusMode, c.bondRadius);
      PeridynamicBlock<2> block;
      block.model = PeridynamicBlock<2>::Model::Beam;
      block.refPositions = beam.points;
      block.bondSet = beam.bonds;
      block.beam = {c.youngsModulus, c.secondMoment, c.area, c.bondRadius};
      block.interiorContact = false;
      const double pointRadius = 0.25 * beam.spacing;
      for (int i = 0; i < c.n; ++i) {
        Pose<2> pose;
        pose.center = beam.points[i];
        const auto shape = std::make_shared<SphereShape<2>>(pointRadius);
        if (i == 0) {
          block.bodyIndex.push_back(sim.addBody(RigidBody<2>::fixedBody(claimId(-1), shape, pose)));
          continue;
        }
        const double density = beam.pointMass[i] / (std::numbers::pi * pointRadius * pointRadius);
        RigidBody<2> body(claimId(-1), shape, density, pose);
        const double accel = c.accel;
        const double damping = c.damping;
        body.bodyForces().push_back([accel, damping](const RigidBody<2>& b, double) {
          const Vec2 f = Vec2(0.0, b.mass() * accel) - damping * b.mass() * b.velocity();
          const double tau = -damping * b.referenceInertia() * b.angularVelocity();
          return std::make_pair(f, tau);
        });
        addGravity(body, gravity);
        block.bodyIndex.push_back(sim.addBody(std::move(body)));
      }
      sim.addPeridynamicBlock(std::move(block));
    }
  }

  // growing spheres
  for (const auto& g : cfg.grows) {
    int idx = -1;
    for (int i = 0; i < static_cast<int>(sim.bodies().size()); ++i)
      if (sim.bodies()[i].id() == g.body) idx = i;
    if (idx < 0) throw SchemaError("grow section references unknown body " + std::to_string(g.body));
    sim.addState(std::make_unique<SphereGrowthState<D>>(&sim, idx, g.rate));
  }

  // contact law
  ViscoelasticContactParams law;
  law.elastic = {cfg.contact.kn, cfg.contact.ks, cfg.contact.mu};
  if (cfg.contact.viscous) {
    law.gammaN = cfg.contact.gammaN;
    law.gammaS = cfg.contact.gammaS;
  }
  sim.setContactLaw(law);
  sim.setContactEnabled(cfg.hasContact || !sim.blocks().empty());

  // tracked bodies, ascending ids
  if (cfg.trackAll) {
    for (const auto& b : sim.bodies()) out.trackIds.push_back(b.id());
  } else {
    out.trackIds = cfg.trackIds;
    for (int id : out.trackIds) {
      bool found = false;
      for (const auto& b : sim.bodies()) found = found || b.id() == id;
      if (!found) throw SchemaError("track references unknown body " + std::to_string(id));
    }
  }
  std::sort(out.trackIds.begin(), out.trackIds.end());

  preflight(sim);
  return out;
}

template BuiltScenario<2> buildScenario<2>(const ScenarioConfig&);
template BuiltScenario<3> buildScenario<3>(const ScenarioConfig&);

}  // namespace pmech
