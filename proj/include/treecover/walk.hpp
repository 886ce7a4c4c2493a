#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "treecover/rng.hpp"
#include "treecover/tree.hpp"

namespace treecover {

struct WalkConfig {
    TreeShape shape;
    bool track_internal = true;
    std::uint64_t seed = 0;
    std::uint64_t replica_id = 0;
    // Optional designated vertex whose arrivals are counted.
    std::optional<VertexRef> count_visits_at;
};

// Occupation times per vertex plus the two clocks: real elapsed seconds and
// the local time accumulated at the root.
struct LocalTimeField {
    TreeShape shape;
    bool track_internal = true;
    std::vector<double> values;  // indexed by TreeShape::id_of
    double real_elapsed = 0.0;
    double root_local = 0.0;

    double at(const VertexRef& v) const { return values[shape.id_of(v)]; }
    double at_leaf(std::uint64_t leaf_index) const {
        return values[shape.level_offset(shape.n) + leaf_index];
    }
    // Whether local times at this depth are meaningful under the tracking mode.
    bool tracks(int depth) const { return track_internal || depth == 0 || depth == shape.n; }
};

// Stop conditions for a run. RootLocalTime realizes the generalized inverse
// of the root clock: the final hold at the root is truncated so the walk
// stops at the root with exactly the requested local time (exact in law by
// memorylessness). SumLeafLocalTime stops at the first return to the root
// after 2*S_k crosses the target.
struct StopRule {
    enum class Kind { RootLocalTime, RealTime, Covered, SumLeafLocalTime } kind = Kind::RootLocalTime;
    double root_time = 0.0;          // RootLocalTime
    double real_time = 0.0;          // RealTime
    int leaf_depth = 0;              // SumLeafLocalTime: depth k
    double leaf_sum_target = 0.0;    // SumLeafLocalTime: stop once 2*S_k > target
    double real_time_cap = 0.0;      // optional abort cap for Covered (0 = none)

    static StopRule root_local_time(double t) { return {Kind::RootLocalTime, t, 0, 0, 0, 0}; }
    static StopRule real_time_limit(double T) { return {Kind::RealTime, 0, T, 0, 0, 0}; }
    static StopRule covered(double cap = 0.0) { return {Kind::Covered, 0, 0, 0, 0, cap}; }
    static StopRule leaf_sum(int k, double target) { return {Kind::SumLeafLocalTime, 0, 0, k, target, 0}; }
};

struct WalkOutcome {
    LocalTimeField field;
    std::optional<double> cover_real;        // real clock at full coverage
    std::optional<double> cover_root_clock;  // root clock at start of the covering excursion
    std::uint64_t jump_count = 0;
    std::uint64_t visited_count = 0;
    std::uint64_t visits_at_target = 0;  // arrivals at WalkConfig::count_visits_at
    bool aborted = false;     // stop rule unreachable under the configured cap
    bool degenerate = false;  // e.g. non-positive target in stop_nu
    double xi = 0.0;          // the external Gaussian used by stop_nu, echoed back
};

// Leaf-depth sums: S = total local time at depth k, R = total over depths
// 0..k, with their 2^{-k}-normalized versions.
struct LeafSums {
    double S = 0.0;
    double S_hat = 0.0;
    double R = 0.0;
    double R_hat = 0.0;
};

struct PhaseSnapshots {
    LocalTimeField snapshot_a;             // field at root-clock time t_A
    LocalTimeField snapshot_b;             // field after additional t_B + s*n
    std::vector<std::uint8_t> phase_b_visited;  // per-leaf marks for phase B alone
    double time_a = 0.0;
    double time_b = 0.0;
};

// Stateful single-replica simulator. The trajectory is a function of
// (seed, replica_id) only; runs can be chained (phase A then phase B).
class Walker {
  public:
    explicit Walker(const WalkConfig& config);

    // Advance until the stop rule fires; accumulates into the same field.
    WalkOutcome run(const StopRule& stop);

    const LocalTimeField& field() const { return field_; }
    std::uint64_t jump_count() const { return jumps_; }
    bool at_root() const { return depth_ == 0; }

    // Begin tallying per-leaf visits from this instant (phase-B bookkeeping).
    void start_leaf_visit_marks();
    const std::vector<std::uint8_t>& leaf_visit_marks() const { return leaf_marks_; }

  private:
    void move_to(int depth, std::uint64_t index);
    double hold_mean() const { return 1.0 / static_cast<double>(deg_); }

    WalkConfig config_;
    rng::Philox rng_;
    LocalTimeField field_;
    std::vector<std::uint8_t> visited_;
    std::vector<std::uint8_t> leaf_marks_;
    bool mark_leaves_ = false;
    std::uint64_t visited_count_ = 0;
    std::uint64_t jumps_ = 0;
    std::uint64_t counted_id_ = UINT64_MAX;
    std::uint64_t target_visits_ = 0;
    int depth_ = 0;
    std::uint64_t index_ = 0;
    std::uint64_t id_ = 0;
    int deg_ = 1;
    double real_elapsed_ = 0.0;
    double real_comp_ = 0.0;  // Kahan compensation for the real clock
    double excursion_start_root_local_ = 0.0;
    // Coverage bookkeeping survives across chained runs.
    std::optional<double> cover_real_;
    std::optional<double> cover_root_clock_;
};

WalkOutcome simulate(const WalkConfig& config, const StopRule& stop);

// Run to full coverage; returns both cover clocks.
WalkOutcome cover_times(const WalkConfig& config);

// Phase A (root clock t_A with sqrt(t_A) the extremal centering) followed by
// phase B (additional root clock (n log n)/2 + s*n), with separate phase-B
// non-visit marks.
PhaseSnapshots run_phases(const WalkConfig& config, double s);

// S, S_hat, R, R_hat at depth k of the given field.
LeafSums leaf_sums(const LocalTimeField& field, int k);

// Stop at the first return to the root after 2*S_k exceeds target.
WalkOutcome stop_tau(const WalkConfig& config, int k, double target);

// tau with target 2^{k+1} * theta, theta = s - 2 sqrt(s) xi; xi is supplied
// externally (N(0,1/2), independent of the walk). Non-positive theta is
// flagged degenerate and the walk is not run.
WalkOutcome stop_nu(const WalkConfig& config, int k, double s, double xi);

// Single excursion from the child of the root on the path to target; true iff
// target is reached before the walk returns to the root. Jump chain only.
bool hit_before_root(const WalkConfig& config, const VertexRef& target);

}  // namespace treecover
