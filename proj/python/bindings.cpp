#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmech/contact.hpp"
#include "pmech/geometry.hpp"
#include "pmech/neighbors.hpp"
#include "pmech/observers.hpp"
#include "pmech/peridynamics.hpp"
#include "pmech/rigid_body.hpp"
#include "pmech/scenario.hpp"
#include "pmech/simulation.hpp"

namespace py = pybind11;
using namespace pmech;

namespace {

std::string sfx(int d) { return std::to_string(d); }

Eigen::Vector4d quatToVec(const Eigen::Quaterniond& q) {
  return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
}

Eigen::Quaterniond vecToQuat(const Eigen::Vector4d& v) {
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  q.normalize();
  return q;
}

template <int D>
void bindDim(py::module_& m) {
  const std::string d = sfx(D);

  py::class_<MassProperties<D>>(m, ("MassProperties" + d).c_str())
      .def_readonly("mass", &MassProperties<D>::mass)
      .def_readonly("volume", &MassProperties<D>::volume)
      .def_readonly("inertia", &MassProperties<D>::inertia);

  py::class_<Shape<D>, std::shared_ptr<Shape<D>>>(m, ("Shape" + d).c_str())
      .def("sdf", &Shape<D>::sdf, py::arg("point"))
      .def("sdf_gradient", &Shape<D>::sdfGradient, py::arg("point"))
      .def("project_to_boundary", &Shape<D>::projectToBoundary, py::arg("point"))
      .def("bounding_radius", &Shape<D>::boundingRadius)
      .def("mass_properties", &Shape<D>::massProperties, py::arg("density"));

  py::class_<SphereShape<D>, Shape<D>, std::shared_ptr<SphereShape<D>>>(
      m, ("SphereShape" + d).c_str())
      .def(py::init<double>(), py::arg("radius"))
      .def_property_readonly("radius", &SphereShape<D>::radius);

  py::class_<BoxShape<D>, Shape<D>, std::shared_ptr<BoxShape<D>>>(m, ("BoxShape" + d).c_str())
      .def(py::init<const Vec<D>&>(), py::arg("extents"))
      .def_property_readonly("extents", &BoxShape<D>::extents);

  py::class_<HalfSpaceShape<D>, Shape<D>, std::shared_ptr<HalfSpaceShape<D>>>(
      m, ("HalfSpaceShape" + d).c_str())
      .def(py::init<const Vec<D>&, double>(), py::arg("normal"), py::arg("offset"))
      .def_property_readonly("normal", &HalfSpaceShape<D>::normal)
      .def_property_readonly("offset", &HalfSpaceShape<D>::offset);

  auto pose = py::class_<Pose<D>>(m, ("Pose" + d).c_str())
                  .def(py::init<>())
                  .def_readwrite("center", &Pose<D>::center);
  if constexpr (D == 2) {
    pose.def_readwrite("angle", &Pose<2>::orientation);
  } else {
    pose.def_property(
        "quaternion", [](const Pose<3>& p) { return quatToVec(p.orientation); },
        [](Pose<3>& p, const Eigen::Vector4d& v) { p.orientation = vecToQuat(v); },
        "orientation as (w, x, y, z); normalized on assignment");
  }

  py::class_<RigidBody<D>>(m, ("RigidBody" + d).c_str())
      .def(py::init([](int id, std::shared_ptr<Shape<D>> shape, double density,
                       const Pose<D>& pose) { return RigidBody<D>(id, shape, density, pose); }),
           py::arg("id"), py::arg("shape"), py::arg("density"), py::arg("pose"))
      .def(py::init([](int id, std::shared_ptr<Shape<D>> shape, double density,
                       const Vec<D>& position) {
             Pose<D> p;
             p.center = position;
             return RigidBody<D>(id, shape, density, p);
           }),
           py::arg("id"), py::arg("shape"), py::arg("density"), py::arg("position"))
      .def_static(
          "fixed",
          [](int id, std::shared_ptr<Shape<D>> shape, const Pose<D>& pose, const Vec<D>& velocity) {
            return RigidBody<D>::fixedBody(id, shape, pose, velocity);
          },
          py::arg("id"), py::arg("shape"), py::arg("pose"),
          py::arg("velocity") = Vec<D>(Vec<D>::Zero()))
      .def_property_readonly("id", &RigidBody<D>::id)
      .def_property_readonly("mass", &RigidBody<D>::mass)
      .def_property_readonly("volume", &RigidBody<D>::volume)
      .def_property_readonly("is_fixed", &RigidBody<D>::fixed)
      .def_property(
          "pose", [](const RigidBody<D>& b) { return b.pose(); },
          [](RigidBody<D>& b, const Pose<D>& p) { b.pose() = p; })
      .def_property(
          "velocity", [](const RigidBody<D>& b) { return b.velocity(); },
          [](RigidBody<D>& b, const Vec<D>& v) { b.velocity() = v; })
      .def_property(
          "angular_velocity", [](const RigidBody<D>& b) { return b.angularVelocity(); },
          [](RigidBody<D>& b, const AngularVelocity<D>& w) { b.angularVelocity() = w; })
      .def_property_readonly("net_force", &RigidBody<D>::netForce)
      .def("world_sdf", &RigidBody<D>::worldSdf, py::arg("point"))
      .def("world_sdf_gradient", &RigidBody<D>::worldSdfGradient, py::arg("point"))
      .def("world_project_to_boundary", &RigidBody<D>::worldProjectToBoundary, py::arg("point"))
      .def("point_velocity", &RigidBody<D>::pointVelocity, py::arg("point"));

  py::class_<ContactSummary<D>>(m, ("ContactSummary" + d).c_str())
      .def_readonly("x1", &ContactSummary<D>::x1)
      .def_readonly("x2", &ContactSummary<D>::x2)
      .def_readonly("bond", &ContactSummary<D>::bond)
      .def_readonly("penetrating", &ContactSummary<D>::penetrating)
      .def_readonly("depth", &ContactSummary<D>::depth)
      .def_readonly("rel_velocity", &ContactSummary<D>::relVelocity)
      .def_readonly("tangential_velocity", &ContactSummary<D>::tangentialVelocity)
      .def_readonly("normal", &ContactSummary<D>::normal)
      .def_readonly("converged", &ContactSummary<D>::converged)
      .def_readonly("iterations", &ContactSummary<D>::iterations);

  m.def(
      "detect_contact",
      [](const RigidBody<D>& home, const RigidBody<D>& neighbor,
         const std::optional<std::pair<Vec<D>, Vec<D>>>& warm) {
        return detectContact<D>(home, neighbor, warm);
      },
      py::arg("home"), py::arg("neighbor"), py::arg("warm_start") = py::none());

  py::class_<SpatialIndex<D>>(m, ("SpatialIndex" + d).c_str())
      .def(py::init<const std::vector<Vec<D>>&, std::vector<int>>(), py::arg("points"),
           py::arg("ids") = std::vector<int>{})
      .def("size", &SpatialIndex<D>::size)
      .def("radius_query", &SpatialIndex<D>::radiusQuery, py::arg("center"), py::arg("h"),
           py::arg("exclude_id") = -1)
      .def("knn_query", &SpatialIndex<D>::knnQuery, py::arg("center"), py::arg("k"),
           py::arg("exclude_id") = -1);

  py::class_<Bond<D>>(m, ("Bond" + d).c_str())
      .def_readonly("i", &Bond<D>::i)
      .def_readonly("j", &Bond<D>::j)
      .def_readonly("ref_length", &Bond<D>::refLength)
      .def_readonly("broken", &Bond<D>::broken);

  py::class_<BondSet<D>>(m, ("BondSet" + d).c_str())
      .def_readonly("bonds", &BondSet<D>::bonds)
      .def_readonly("weighted_volume", &BondSet<D>::weightedVolume)
      .def_readonly("horizon", &BondSet<D>::horizon)
      .def_readonly("point_volume", &BondSet<D>::pointVolume);

  m.def(("build_horizon" + d).c_str(), &buildHorizon<D>, py::arg("points"), py::arg("horizon"),
        py::arg("point_volume"));
  m.def(("compute_dilations" + d).c_str(), &computeDilations<D>, py::arg("bond_set"),
        py::arg("ref_points"), py::arg("cur_points"));
  m.def(("assemble_peridynamic_forces" + d).c_str(), &assemblePeridynamicForces<D>,
        py::arg("bond_set"), py::arg("ref_points"), py::arg("cur_points"), py::arg("material"));
  m.def(("apply_fracture" + d).c_str(), &applyFracture<D>, py::arg("bond_set"),
        py::arg("ref_points"), py::arg("cur_points"), py::arg("critical_stretch"));

  using Sim = Simulation<D>;
  using Record = typename Sim::PairRecord;
  py::class_<Record>(m, ("PairRecord" + d).c_str())
      .def_readonly("i", &Record::i)
      .def_readonly("j", &Record::j)
      .def_readonly("summary", &Record::summary)
      .def_readonly("slipping", &Record::slipping)
      .def_property_readonly("force", [](const Record& r) { return r.load.force; })
      .def_property_readonly("normal_force", [](const Record& r) { return r.load.normalPart; })
      .def_property_readonly("shear_force", [](const Record& r) { return r.load.shearPart; });

  py::class_<Sim>(m, ("Simulation" + d).c_str())
      .def(py::init<>())
      .def("add_body", &Sim::addBody, py::arg("body"))
      .def("set_contact_law", &Sim::setContactLaw, py::arg("law"))
      .def("set_contact_enabled", &Sim::setContactEnabled, py::arg("on"))
      .def("set_threads", &Sim::setThreads, py::arg("threads"))
      .def(
          "add_gravity",
          [](Sim& sim, const Vec<D>& g) {
            for (auto& body : sim.bodies()) {
              if (body.fixed()) continue;
              body.bodyForces().push_back([g](const RigidBody<D>& b, double) {
                return std::make_pair(Vec<D>(b.mass() * g), Kinematics<D>::zeroAngular());
              });
            }
          },
          py::arg("g"), "apply a constant acceleration to every free body already added")
      .def("add_observer", &Sim::addObserver, py::arg("observer"))
      .def("prime_forces", &Sim::primeForces)
      .def("step_once", &Sim::stepOnce, py::arg("dt"))
      .def("run", &Sim::run, py::arg("plan"))
      .def_property_readonly("time", &Sim::time)
      .def_property_readonly("num_bodies", [](const Sim& s) { return s.bodies().size(); })
      .def(
          "body", [](Sim& s, int i) -> RigidBody<D>& { return s.bodies().at(i); }, py::arg("i"),
          py::return_value_policy::reference_internal)
      .def_property_readonly("pair_records", &Sim::pairRecords)
      .def_property_readonly("bond_counts", &Sim::bondCounts);

  m.def(
      ("homogenized_cauchy_stress" + d).c_str(),
      [](const Sim& sim) {
        const auto r = homogenizedCauchyStress(sim);
        return py::make_tuple(r.stress, r.volume);
      },
      py::arg("sim"), "returns (stress, bounding volume)");
  m.def(("strain_proxy" + d).c_str(), &strainProxy<D>, py::arg("sim"), py::arg("body_id"),
        py::arg("axis"), py::arg("ref_coord"), py::arg("ref_length"));
}

}  // namespace

PYBIND11_MODULE(_pmech, m) {
  m.doc() = "DEM + state-based peridynamics with SDF particle geometries";

  py::class_<ElasticContactParams>(m, "ElasticContactParams")
      .def(py::init([](double kn, double ks, double mu) {
             ElasticContactParams p;
             p.kn = kn;
             p.ks = ks;
             p.mu = mu;
             return p;
           }),
           py::arg("kn"), py::arg("ks"), py::arg("mu"))
      .def_readwrite("kn", &ElasticContactParams::kn)
      .def_readwrite("ks", &ElasticContactParams::ks)
      .def_readwrite("mu", &ElasticContactParams::mu);

  py::class_<ViscoelasticContactParams>(m, "ViscoelasticContactParams")
      .def(py::init([](double kn, double ks, double mu, double gammaN, double gammaS) {
             ViscoelasticContactParams p;
             p.elastic = {kn, ks, mu};
             p.gammaN = gammaN;
             p.gammaS = gammaS;
             return p;
           }),
           py::arg("kn"), py::arg("ks"), py::arg("mu"), py::arg("gamma_n") = 0.0,
           py::arg("gamma_s") = 0.0)
      .def_readwrite("elastic", &ViscoelasticContactParams::elastic)
      .def_readwrite("gamma_n", &ViscoelasticContactParams::gammaN)
      .def_readwrite("gamma_s", &ViscoelasticContactParams::gammaS);

  py::class_<StepPlan>(m, "StepPlan")
      .def(py::init([](double dt, double tEnd, double outputInterval) {
             return StepPlan{dt, tEnd, outputInterval};
           }),
           py::arg("dt"), py::arg("t_end"), py::arg("output_interval"))
      .def_readwrite("dt", &StepPlan::dt)
      .def_readwrite("t_end", &StepPlan::tEnd)
      .def_readwrite("output_interval", &StepPlan::outputInterval);

  py::class_<LinearSolidMaterial>(m, "LinearSolidMaterial")
      .def(py::init([](double k, double mu, double horizon, double sc, double vr, double rho) {
             LinearSolidMaterial mat;
             mat.bulkModulus = k;
             mat.shearModulus = mu;
             mat.horizon = horizon;
             mat.criticalStretch = sc;
             mat.pointVolume = vr;
             mat.density = rho;
             return mat;
           }),
           py::arg("bulk_modulus"), py::arg("shear_modulus"), py::arg("horizon"),
           py::arg("critical_stretch") = 0.01, py::arg("point_volume") = 0.0,
           py::arg("density") = 0.0)
      .def_readwrite("bulk_modulus", &LinearSolidMaterial::bulkModulus)
      .def_readwrite("shear_modulus", &LinearSolidMaterial::shearModulus)
      .def_readwrite("horizon", &LinearSolidMaterial::horizon)
      .def_readwrite("critical_stretch", &LinearSolidMaterial::criticalStretch)
      .def_readwrite("point_volume", &LinearSolidMaterial::pointVolume)
      .def_readwrite("density", &LinearSolidMaterial::density);

  bindDim<2>(m);
  bindDim<3>(m);

  py::class_<ConvexPolygonShape, Shape<2>, std::shared_ptr<ConvexPolygonShape>>(
      m, "ConvexPolygonShape")
      .def(py::init<std::vector<Vec2>>(), py::arg("vertices"))
      .def_property_readonly("vertices", &ConvexPolygonShape::vertices);
  py::class_<ConvexPolyhedronShape, Shape<3>, std::shared_ptr<ConvexPolyhedronShape>>(
      m, "ConvexPolyhedronShape")
      .def(py::init<std::vector<Vec3>, std::vector<std::vector<int>>>(), py::arg("vertices"),
           py::arg("faces"))
      .def_property_readonly("vertices", &ConvexPolyhedronShape::vertices)
      .def_property_readonly("faces", &ConvexPolyhedronShape::faces);

  m.def("make_regular_polygon", &makeRegularPolygon, py::arg("sides"), py::arg("circumradius"));
  m.def("make_extruded_polygon", &makeExtrudedPolygon, py::arg("polygon"), py::arg("height"));
  m.def("hex_packing_centers", &hexPackingCenters, py::arg("rows"), py::arg("cols"),
        py::arg("layers"), py::arg("radius"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv = args;
        argv.insert(argv.begin(), "pmech");
        std::vector<char*> ptrs;
        ptrs.reserve(argv.size());
        for (auto& a : argv) ptrs.push_back(a.data());
        return runCli(static_cast<int>(ptrs.size()), ptrs.data());
      },
      py::arg("args"), "run the command-line driver; returns its exit code");

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
}
