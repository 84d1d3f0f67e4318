#include "pmech/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include "pmech/neighbors.hpp"

namespace pmech {

namespace {

/// Static-chunk parallel loop: iteration i is always computed exactly once and
/// written to slot i, so results are identical for any thread count.
template <class F>
void parallelFor(int n, int threads, F&& f) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  const int chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        for (int i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

long long pairKey(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<long long>(i) << 32) | static_cast<unsigned int>(j);
}

/// StateObject with a right-hand side frozen at the latest force phase; used
/// to advance the stored shear forces through the standard RK2 step.
class FrozenRhsState final : public StateObject {
 public:
  FrozenRhsState(Eigen::VectorXd s, Eigen::VectorXd r) : s_(std::move(s)), r_(std::move(r)) {}
  Eigen::VectorXd state() const override { return s_; }
  void setState(const Eigen::VectorXd& s) override { s_ = s; }
  Eigen::VectorXd rhs(const Eigen::VectorXd&, double) const override { return r_; }

 private:
  Eigen::VectorXd s_, r_;
};

template <int D>
Eigen::VectorXd toDynamic(const Vec<D>& v) {
  Eigen::VectorXd s(D);
  for (int i = 0; i < D; ++i) s[i] = v[i];
  return s;
}

template <int D>
Vec<D> fromDynamic(const Eigen::VectorXd& s) {
  Vec<D> v;
  for (int i = 0; i < D; ++i) v[i] = s[i];
  return v;
}

}  // namespace

template <int D>
int Simulation<D>::addBody(RigidBody<D> body) {
  bodies_.push_back(std::move(body));
  blockOf_.emplace_back(-1, -1);
  return static_cast<int>(bodies_.size()) - 1;
}

template <int D>
void Simulation<D>::addPeridynamicBlock(PeridynamicBlock<D> block) {
  const int blockId = static_cast<int>(blocks_.size());
  if (block.bodyIndex.size() != block.refPositions.size())
    throw SchemaError("peridynamic block: bodyIndex/refPositions size mismatch");
  for (size_t p = 0; p < block.bodyIndex.size(); ++p) {
    const int b = block.bodyIndex[p];
    if (b < 0 || b >= static_cast<int>(bodies_.size()))
      throw UnknownBodyId("peridynamic block references unknown body");
    blockOf_[b] = {blockId, static_cast<int>(p)};
  }
  std::unordered_map<long long, int> lookup;
  for (size_t bi = 0; bi < block.bondSet.bonds.size(); ++bi) {
    const auto& b = block.bondSet.bonds[bi];
    lookup[pairKey(b.i, b.j)] = static_cast<int>(bi);
  }
  bondLookup_.push_back(std::move(lookup));
  blocks_.push_back(std::move(block));
}

template <int D>
void Simulation<D>::addState(std::unique_ptr<StateObject> state) {
  states_.push_back(std::move(state));
}

template <int D>
std::vector<int> Simulation<D>::bondCounts() const {
  std::vector<int> counts(bodies_.size(), 0);
  for (const auto& blk : blocks_) {
    for (const auto& b : blk.bondSet.bonds) {
      if (b.broken) continue;
      ++counts[blk.bodyIndex[b.i]];
      ++counts[blk.bodyIndex[b.j]];
    }
  }
  return counts;
}

template <int D>
bool Simulation<D>::bondedPair(int i, int j) const {
  const auto [bi, pi] = blockOf_[i];
  const auto [bj, pj] = blockOf_[j];
  if (bi < 0 || bi != bj) return false;
  const auto& lookup = bondLookup_[bi];
  const auto it = lookup.find(pairKey(pi, pj));
  if (it == lookup.end()) return false;
  return !blocks_[bi].bondSet.bonds[it->second].broken;
}

template <int D>
ViscoelasticContactParams Simulation<D>::lawFor(int i, int j) const {
  const auto [bi, pi] = blockOf_[i];
  const auto [bj, pj] = blockOf_[j];
  if (bi >= 0 && bi == bj) {
    ViscoelasticContactParams p;
    p.elastic = blocks_[bi].handoff;
    return p;
  }
  return law_;
}

template <int D>
void Simulation<D>::buildCandidates() {
  candidates_.clear();
  if (!contactEnabled_) return;

  std::vector<int> bounded, walls;
  for (int i = 0; i < static_cast<int>(bodies_.size()); ++i) {
    if (std::isinf(bodies_[i].shape()->boundingRadius()))
      walls.push_back(i);
    else
      bounded.push_back(i);
  }
  if (bounded.empty()) return;

  double maxR = 0.0;
  std::vector<Vec<D>> centers;
  centers.reserve(bounded.size());
  for (int i : bounded) {
    centers.push_back(bodies_[i].pose().center);
    maxR = std::max(maxR, bodies_[i].shape()->boundingRadius());
  }
  const double skin = 0.1 * maxR;
  const SpatialIndex<D> index(centers, bounded);

  auto admissible = [&](int i, int j) {
    if (bodies_[i].fixed() && bodies_[j].fixed()) return false;
    const auto [bi, pi] = blockOf_[i];
    const auto [bj, pj] = blockOf_[j];
    if (bi >= 0 && bi == bj) {
      if (!blocks_[bi].interiorContact) return false;
      if (bondedPair(i, j)) return false;
    }
    return true;
  };

  for (size_t k = 0; k < bounded.size(); ++k) {
    const int i = bounded[k];
    const double h = bodies_[i].shape()->boundingRadius() + maxR + skin;
    for (int j : index.radiusQuery(centers[k], h, i)) {
      if (j <= i) continue;
      if (admissible(i, j)) candidates_.emplace_back(i, j);
    }
  }
  for (int w : walls) {
    for (size_t k = 0; k < bounded.size(); ++k) {
      const int i = bounded[k];
      if (bodies_[i].fixed() && bodies_[w].fixed()) continue;
      if (bodies_[w].worldSdf(centers[k]) < bodies_[i].shape()->boundingRadius() + skin)
        candidates_.emplace_back(std::min(i, w), std::max(i, w));
    }
  }
  std::sort(candidates_.begin(), candidates_.end());
}

template <int D>
void Simulation<D>::computeForces(double t) {
  for (auto& b : bodies_) b.resetLoads();
  pairRecords_.clear();

  // 1. contact: detect in parallel, apply serially in pair order
  buildCandidates();
  std::vector<ContactSummary<D>> results(candidates_.size());
  parallelFor(static_cast<int>(candidates_.size()), threads_, [&](int k) {
    const auto [i, j] = candidates_[k];
    WarmStart<D> warm;
    if (const auto it = warm_.find(candidates_[k]); it != warm_.end()) warm = it->second;
    results[k] = detectContact(bodies_[i], bodies_[j], warm);
  });

  std::map<Key, std::pair<Vec<D>, Vec<D>>> nextWarm;
  for (size_t k = 0; k < candidates_.size(); ++k) {
    const auto [i, j] = candidates_[k];
    const ContactSummary<D>& s = results[k];
    if (!s.converged) {
      if (verbose_)
        std::cerr << "contact solve stalled for pair (" << bodies_[i].id() << ", "
                  << bodies_[j].id() << "); skipped\n";
      continue;
    }
    nextWarm[candidates_[k]] = {s.x1, s.x2};
    if (!s.penetrating) continue;

    PairRecord rec;
    rec.i = i;
    rec.j = j;
    rec.summary = s;
    rec.law = lawFor(i, j);
    Vec<D> shearState = Vec<D>::Zero();
    if (const auto it = shear_.find(candidates_[k]); it != shear_.end()) shearState = it->second;
    rec.load = viscoelasticForces(s, rec.law, shearState);
    const Vec<D> uncapped = shearState - rec.law.gammaS * s.tangentialVelocity;
    rec.slipping = uncapped.norm() > rec.law.elastic.mu * rec.load.normalPart.norm() + 1e-300;

    bodies_[i].applyPairLoad(rec.load.force, rec.load.momentArm);
    bodies_[j].applyPairLoad(Vec<D>(-rec.load.force), rec.load.momentArm);
    pairRecords_.push_back(std::move(rec));
  }
  warm_ = std::move(nextWarm);

  // 2. bonded internal forces, assembled point-by-point so the result does not
  //    depend on the thread count
  for (auto& blk : blocks_) {
    const int n = static_cast<int>(blk.bodyIndex.size());
    std::vector<Vec<D>> cur(n);
    for (int p = 0; p < n; ++p) cur[p] = bodies_[blk.bodyIndex[p]].pose().center;
    const auto& set = blk.bondSet;

    if (blk.model == PeridynamicBlock<D>::Model::LinearSolid) {
      std::vector<double> theta(n, 0.0);
      parallelFor(n, threads_, [&](int p) {
        double acc = 0.0;
        for (int bi : set.adjacency[p]) {
          const auto& b = set.bonds[bi];
          if (b.broken) continue;
          const double e = (cur[b.j] - cur[b.i]).norm() - b.refLength;
          acc += influence(b.refLength, set.horizon) * b.refLength * e * set.pointVolume;
        }
        theta[p] = set.weightedVolume[p] > 0.0 ? 3.0 * acc / set.weightedVolume[p] : 0.0;
      });
      const double vr2 = set.pointVolume * set.pointVolume;
      parallelFor(n, threads_, [&](int p) {
        Vec<D> f = Vec<D>::Zero();
        for (int bi : set.adjacency[p]) {
          const auto& b = set.bonds[bi];
          if (b.broken) continue;
          const Vec<D> deformed = cur[b.j] - cur[b.i];
          const double len = deformed.norm();
          if (len < 1e-12) throw DegenerateDeformedBond("deformed bond length below 1e-12");
          const double e = len - b.refLength;
          const double w = influence(b.refLength, set.horizon);
          const double fij =
              linearSolidScalarState(w, b.refLength, theta[b.i], e, set.weightedVolume[b.i], blk.solid);
          const double fji =
              linearSolidScalarState(w, b.refLength, theta[b.j], e, set.weightedVolume[b.j], blk.solid);
          const Vec<D> eta = (fij + fji) * (deformed / len);
          f += (p == b.i ? eta : Vec<D>(-eta)) * vr2;
        }
        bodies_[blk.bodyIndex[p]].applyForce(f);
      });
    } else {
      parallelFor(n, threads_, [&](int p) {
        auto& body = bodies_[blk.bodyIndex[p]];
        for (int bi : set.adjacency[p]) {
          const auto& b = set.bonds[bi];
          if (b.broken) continue;
          const auto loads = beamBondLoads(b, bodies_[blk.bodyIndex[b.i]].pose(),
                                           bodies_[blk.bodyIndex[b.j]].pose(), blk.beam);
          if (p == b.i) {
            body.applyForce(loads.forceI);
            body.applyTorque(loads.torqueI);
          } else {
            body.applyForce(loads.forceJ);
            body.applyTorque(loads.torqueJ);
          }
        }
      });
    }
  }

  // 3. external body forces
  for (auto& b : bodies_) {
    if (!b.fixed()) b.accumulateBodyForces(t);
  }
}

template <int D>
void Simulation<D>::cacheAccelerations() {
  const int n = static_cast<int>(bodies_.size());
  accel_.assign(n, Vec<D>::Zero());
  angAccel_.assign(n, Kinematics<D>::zeroAngular());
  parallelFor(n, threads_, [&](int i) {
    if (bodies_[i].fixed()) return;
    const auto [a, alpha] = bodies_[i].computeAccelerations();
    accel_[i] = a;
    angAccel_[i] = alpha;
  });
}

template <int D>
void Simulation<D>::updateShearStates(double dt) {
  std::map<Key, Vec<D>> next;
  for (const auto& rec : pairRecords_) {
    const Key k{rec.i, rec.j};
    Vec<D> cur = Vec<D>::Zero();
    if (const auto it = shear_.find(k); it != shear_.end()) cur = it->second;
    FrozenRhsState st(toDynamic<D>(cur),
                      toDynamic<D>(shearRhs(rec.summary, rec.law.elastic.ks)));
    rk2Step(st, time_, dt);
    next[k] = fromDynamic<D>(st.state());
  }
  // pairs that separated are dropped: the stored shear force resets to zero
  shear_ = std::move(next);
}

template <int D>
void Simulation<D>::applyBlockFracture() {
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    auto& blk = blocks_[bi];
    if (!blk.fractureEnabled) continue;
    const int n = static_cast<int>(blk.bodyIndex.size());
    std::vector<Vec<D>> cur(n);
    for (int p = 0; p < n; ++p) cur[p] = bodies_[blk.bodyIndex[p]].pose().center;
    for (auto [i, j] : applyFracture(blk.bondSet, blk.refPositions, cur, blk.solid.criticalStretch))
      fractureEvents_.push_back({time_, static_cast<int>(bi), i, j});
  }
}

template <int D>
void Simulation<D>::checkFinite() const {
  for (const auto& b : bodies_) {
    bool ok = b.pose().center.allFinite() && b.velocity().allFinite();
    if constexpr (D == 2)
      ok = ok && std::isfinite(b.pose().orientation) && std::isfinite(b.angularVelocity());
    else
      ok = ok && b.pose().orientation.coeffs().allFinite() && b.angularVelocity().allFinite();
    if (!ok)
      throw std::runtime_error("simulation aborted: non-finite state on body " +
                               std::to_string(b.id()));
  }
}

template <int D>
void Simulation<D>::primeForces() {
  computeForces(time_);
  cacheAccelerations();
  primed_ = true;
}

template <int D>
void Simulation<D>::stepOnce(double dt) {
  if (!primed_) primeForces();
  const int n = static_cast<int>(bodies_.size());

  // drift + first half kick with the accelerations cached at the step start
  parallelFor(n, threads_, [&](int i) {
    auto& b = bodies_[i];
    if (b.fixed()) {
      b.pose().center += b.velocity() * dt;
      return;
    }
    advancePose(b.pose(), b.velocity(), b.angularVelocity(), accel_[i], angAccel_[i], dt);
    b.velocity() += 0.5 * dt * accel_[i];
    b.angularVelocity() += 0.5 * dt * angAccel_[i];
  });

  computeForces(time_ + dt);
  cacheAccelerations();

  parallelFor(n, threads_, [&](int i) {
    if (bodies_[i].fixed()) return;
    bodies_[i].velocity() += 0.5 * dt * accel_[i];
    bodies_[i].angularVelocity() += 0.5 * dt * angAccel_[i];
  });

  updateShearStates(dt);
  for (auto& s : states_) rk2Step(*s, time_, dt);

  time_ += dt;
  applyBlockFracture();
  for (auto& s : states_) s->postStep(time_);
  checkFinite();
}

template <int D>
void Simulation<D>::fireObservers() const {
  for (const auto& obs : observers_) obs(*this, time_);
}

template <int D>
void Simulation<D>::run(const StepPlan& plan) {
  if (!(plan.dt > 0.0)) throw SchemaError("time step must be positive");
  primeForces();
  fireObservers();
  const long nSteps = std::lround(plan.tEnd / plan.dt);
  const long every = plan.outputInterval > 0.0
                         ? std::max(1L, std::lround(plan.outputInterval / plan.dt))
                         : std::max(1L, nSteps);
  for (long s = 1; s <= nSteps; ++s) {
    stepOnce(plan.dt);
    if (s % every == 0 || s == nSteps) fireObservers();
  }
}

template class Simulation<2>;
template class Simulation<3>;

}  // namespace pmech
