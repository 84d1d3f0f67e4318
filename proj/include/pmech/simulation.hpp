#pragma once

#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pmech/common.hpp"
#include "pmech/contact.hpp"
#include "pmech/integration.hpp"
#include "pmech/peridynamics.hpp"
#include "pmech/rigid_body.hpp"

namespace pmech {

/// A bonded cloud of material points (each one a rigid body in the global
/// body list). Pairs joined by an unbroken bond interact through the block's
/// constitutive model; pairs without one fall back to elastic contact with
/// the handoff parameters.
template <int D>
struct PeridynamicBlock {
  enum class Model { LinearSolid, Beam };

  Model model = Model::LinearSolid;
  std::vector<int> bodyIndex;        // point -> index into Simulation bodies
  std::vector<Vec<D>> refPositions;  // reference configuration
  BondSet<D> bondSet;
  LinearSolidMaterial solid;
  BeamBondMaterial beam;
  ElasticContactParams handoff;   // contact law between non-bonded points
  bool fractureEnabled = false;
  bool interiorContact = true;    // detect contact between non-bonded points
};

struct FractureEvent {
  double time = 0.0;
  int block = -1;
  int i = -1;  // point indices within the block
  int j = -1;
};

template <int D>
class Simulation {
 public:
  Simulation() = default;
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  Simulation(Simulation&&) = default;
  Simulation& operator=(Simulation&&) = default;

  /// Contact pair solved during the latest force phase (penetrating only).
  struct PairRecord {
    int i = -1;  // body indices, i < j; forces below act on body i
    int j = -1;
    ContactSummary<D> summary;
    PairLoad<D> load;
    ViscoelasticContactParams law;
    bool slipping = false;  // shear was clipped at the Coulomb cap
  };

  using Observer = std::function<void(const Simulation&, double)>;

  int addBody(RigidBody<D> body);
  void addPeridynamicBlock(PeridynamicBlock<D> block);
  void addState(std::unique_ptr<StateObject> state);
  void addObserver(Observer obs) { observers_.push_back(std::move(obs)); }

  void setContactLaw(const ViscoelasticContactParams& law) { law_ = law; }
  void setContactEnabled(bool on) { contactEnabled_ = on; }
  void setThreads(int threads) { threads_ = threads < 1 ? 1 : threads; }
  void setVerbose(bool v) { verbose_ = v; }

  std::vector<RigidBody<D>>& bodies() { return bodies_; }
  const std::vector<RigidBody<D>>& bodies() const { return bodies_; }
  const std::vector<PeridynamicBlock<D>>& blocks() const { return blocks_; }
  const std::vector<PairRecord>& pairRecords() const { return pairRecords_; }
  const std::vector<FractureEvent>& fractureEvents() const { return fractureEvents_; }
  double time() const { return time_; }

  /// Unbroken bonds incident to each body (zero for plain DEM particles).
  std::vector<int> bondCounts() const;

  /// Recompute all loads and cache accelerations at the current configuration.
  void primeForces();

  /// One velocity-Verlet step: drift, half kick, force phase at the new
  /// configuration, second half kick, auxiliary-state RK2, fracture, hooks.
  void stepOnce(double dt);

  /// Run the full plan, firing observers at t = 0, every output interval and
  /// at the end.
  void run(const StepPlan& plan);

 private:
  using Key = std::pair<int, int>;

  ViscoelasticContactParams lawFor(int i, int j) const;
  bool bondedPair(int i, int j) const;
  void buildCandidates();
  void computeForces(double t);
  void cacheAccelerations();
  void updateShearStates(double dt);
  void applyBlockFracture();
  void checkFinite() const;
  void fireObservers() const;

  std::vector<RigidBody<D>> bodies_;
  std::vector<std::pair<int, int>> blockOf_;  // body -> (block, point) or (-1, -1)
  std::vector<PeridynamicBlock<D>> blocks_;
  std::vector<std::unordered_map<long long, int>> bondLookup_;  // per block: pair key -> bond

  ViscoelasticContactParams law_;
  bool contactEnabled_ = true;
  int threads_ = 1;
  bool verbose_ = false;

  std::vector<Key> candidates_;
  std::map<Key, std::pair<Vec<D>, Vec<D>>> warm_;
  std::map<Key, Vec<D>> shear_;
  std::vector<PairRecord> pairRecords_;
  std::vector<FractureEvent> fractureEvents_;

  std::vector<Vec<D>> accel_;
  std::vector<AngularVelocity<D>> angAccel_;

  std::vector<std::unique_ptr<StateObject>> states_;
  std::vector<Observer> observers_;

  double time_ = 0.0;
  bool primed_ = false;
};

/// Auxiliary state driving a sphere body's radius: dR/dt = rate. The shape is
/// swapped in the post-step hook so geometry changes between steps only.
template <int D>
class SphereGrowthState final : public StateObject {
 public:
  SphereGrowthState(Simulation<D>* sim, int bodyIndex, double rate)
      : sim_(sim), bodyIndex_(bodyIndex), rate_(rate) {
    const auto* sphere =
        dynamic_cast<const SphereShape<D>*>(sim_->bodies()[bodyIndex_].shape().get());
    if (!sphere) throw DegenerateShape("SphereGrowthState requires a sphere body");
    radius_ = sphere->radius();
  }

  Eigen::VectorXd state() const override {
    Eigen::VectorXd s(1);
    s[0] = radius_;
    return s;
  }
  void setState(const Eigen::VectorXd& s) override { radius_ = s[0]; }
  Eigen::VectorXd rhs(const Eigen::VectorXd&, double) const override {
    Eigen::VectorXd r(1);
    r[0] = rate_;
    return r;
  }
  void postStep(double) override {
    sim_->bodies()[bodyIndex_].setShape(std::make_shared<SphereShape<D>>(radius_));
  }

 private:
  Simulation<D>* sim_;
  int bodyIndex_;
  double rate_;
  double radius_;
};

}  // namespace pmech
