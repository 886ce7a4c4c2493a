#include "treecover/walk.hpp"

#include <cmath>
#include <stdexcept>

#include "treecover/numeric.hpp"

namespace treecover {

Walker::Walker(const WalkConfig& config)
    : config_(config), rng_(config.seed, rng::stream_id(0x77616c6bull, config.replica_id, rng::Lane::Walk)) {
    const auto count = config.shape.vertex_count();
    field_.shape = config.shape;
    field_.track_internal = config.track_internal;
    field_.values.assign(count, 0.0);
    visited_.assign(count, 0);
    visited_[0] = 1;  // the walk starts at the root
    visited_count_ = 1;
    depth_ = 0;
    index_ = 0;
    id_ = 0;
    deg_ = degree(root_of(config.shape.kind), config.shape);
    if (config.count_visits_at) {
        counted_id_ = config.shape.id_of(*config.count_visits_at);
        if (counted_id_ == 0) target_visits_ = 1;
    }
}

void Walker::move_to(int depth, std::uint64_t index) {
    depth_ = depth;
    index_ = index;
    id_ = field_.shape.level_offset(depth) + index;
    if (depth == field_.shape.n) {
        deg_ = 1;
    } else if (depth == 0) {
        deg_ = field_.shape.kind == TreeKind::Regular ? 2 : 1;
    } else {
        deg_ = 3;
    }
    if (!visited_[id_]) {
        visited_[id_] = 1;
        ++visited_count_;
        if (!cover_real_ && visited_count_ == field_.shape.vertex_count()) {
            // Coverage happens at the arrival instant, before any time accrues here.
            cover_real_ = real_elapsed_;
            cover_root_clock_ = excursion_start_root_local_;
        }
    }
    if (id_ == counted_id_) ++target_visits_;
    if (mark_leaves_ && depth == field_.shape.n) leaf_marks_[index] = 1;
}

void Walker::start_leaf_visit_marks() {
    leaf_marks_.assign(field_.shape.leaf_count(), 0);
    mark_leaves_ = true;
    if (depth_ == field_.shape.n) leaf_marks_[index_] = 1;
}

WalkOutcome Walker::run(const StopRule& stop) {
    const TreeShape shape = field_.shape;
    const int n = shape.n;
    double* values = field_.values.data();

    const bool sum_mode = stop.kind == StopRule::Kind::SumLeafLocalTime;
    double leaf_sum = 0.0;
    if (sum_mode) {
        const std::uint64_t off = shape.level_offset(stop.leaf_depth);
        const std::uint64_t end = off + shape.width(stop.leaf_depth);
        for (std::uint64_t id = off; id < end; ++id) leaf_sum += values[id];
    }
    bool crossed = sum_mode && 2.0 * leaf_sum > stop.leaf_sum_target;

    auto advance_clock = [this](double dt) {
        const double y = dt - real_comp_;
        const double t = real_elapsed_ + y;
        real_comp_ = (t - real_elapsed_) - y;
        real_elapsed_ = t;
    };

    bool aborted = false;
    for (;;) {
        if (stop.kind == StopRule::Kind::Covered) {
            if (cover_real_) break;
            if (stop.real_time_cap > 0.0 && real_elapsed_ >= stop.real_time_cap) {
                aborted = true;
                break;
            }
        }

        // Hold at the current vertex (possibly truncated by the stop rule).
        if (depth_ == 0) {
            if (stop.kind == StopRule::Kind::RootLocalTime) {
                const double remaining = stop.root_time - values[0];
                if (remaining <= 0.0) break;
                const double hold = rng_.exponential(hold_mean());
                if (hold >= remaining) {
                    // Truncated final hold; exact in law by memorylessness, and
                    // leaves the walk at the root with exactly the target time.
                    values[0] = stop.root_time;
                    advance_clock(remaining);
                    break;
                }
                values[0] += hold;
                advance_clock(hold);
            } else if (sum_mode && crossed) {
                break;  // first return to the root after 2*S_k crossed the target
            } else {
                const double hold = rng_.exponential(hold_mean());
                if (stop.kind == StopRule::Kind::RealTime && real_elapsed_ + hold >= stop.real_time) {
                    values[0] += stop.real_time - real_elapsed_;
                    real_elapsed_ = stop.real_time;
                    real_comp_ = 0.0;
                    break;
                }
                values[0] += hold;
                advance_clock(hold);
            }
            excursion_start_root_local_ = values[0];
        } else {
            const double hold = rng_.exponential(hold_mean());
            if (stop.kind == StopRule::Kind::RealTime && real_elapsed_ + hold >= stop.real_time) {
                values[id_] += stop.real_time - real_elapsed_;
                real_elapsed_ = stop.real_time;
                real_comp_ = 0.0;
                break;
            }
            values[id_] += hold;
            advance_clock(hold);
            if (sum_mode && depth_ == stop.leaf_depth) {
                leaf_sum += hold;
                if (!crossed && 2.0 * leaf_sum > stop.leaf_sum_target) crossed = true;
            }
        }

        // Jump to a uniformly random neighbor.
        ++jumps_;
        if (depth_ == 0) {
            const std::uint64_t b = deg_ == 1 ? 0 : rng_.below(2);
            move_to(1, shape.kind == TreeKind::Regular ? b : 0);
        } else if (depth_ == n) {
            move_to(depth_ - 1, depth_ == 1 ? 0 : (index_ >> 1));
        } else {
            const std::uint32_t r = rng_.below(3);
            if (r == 0) {
                move_to(depth_ - 1, depth_ == 1 ? 0 : (index_ >> 1));
            } else {
                move_to(depth_ + 1, (index_ << 1) | (r - 1));
            }
        }
    }

    field_.real_elapsed = real_elapsed_;
    field_.root_local = values[0];

    WalkOutcome out;
    out.field = field_;
    out.cover_real = cover_real_;
    out.cover_root_clock = cover_root_clock_;
    out.jump_count = jumps_;
    out.visited_count = visited_count_;
    out.visits_at_target = target_visits_;
    out.aborted = aborted;
    return out;
}

WalkOutcome simulate(const WalkConfig& config, const StopRule& stop) {
    Walker walker(config);
    return walker.run(stop);
}

WalkOutcome cover_times(const WalkConfig& config) {
    Walker walker(config);
    return walker.run(StopRule::covered());
}

PhaseSnapshots run_phases(const WalkConfig& config, double s) {
    const int n = config.shape.n;
    if (n < 2) throw std::invalid_argument("run_phases needs depth >= 2");
    const double log2 = std::log(2.0);
    const double sqrt_ta =
        std::sqrt(log2) * n - 3.0 / (4.0 * std::sqrt(log2)) * std::log(static_cast<double>(n));
    const double time_a = sqrt_ta * sqrt_ta;
    const double time_b = 0.5 * n * std::log(static_cast<double>(n)) + s * n;

    Walker walker(config);
    PhaseSnapshots out;
    out.time_a = time_a;
    out.time_b = time_b;
    out.snapshot_a = walker.run(StopRule::root_local_time(time_a)).field;
    walker.start_leaf_visit_marks();
    out.snapshot_b = walker.run(StopRule::root_local_time(time_a + time_b)).field;
    out.phase_b_visited = walker.leaf_visit_marks();
    return out;
}

LeafSums leaf_sums(const LocalTimeField& field, int k) {
    if (k < 0 || k > field.shape.n) throw std::out_of_range("leaf_sums: depth out of range");
    for (int d = 0; d <= k; ++d)
        if (!field.tracks(d)) throw std::logic_error("leaf_sums: depth not tracked by this field");
    LeafSums out;
    KahanSum total;
    for (int d = 0; d <= k; ++d) {
        const std::uint64_t off = field.shape.level_offset(d);
        const std::uint64_t w = field.shape.width(d);
        KahanSum level;
        for (std::uint64_t i = 0; i < w; ++i) level.add(field.values[off + i]);
        if (d == k) out.S = level.value();
        total.add(level.value());
    }
    out.R = total.value();
    const double scale = std::ldexp(1.0, -k);
    out.S_hat = out.S * scale;
    out.R_hat = out.R * scale;
    return out;
}

WalkOutcome stop_tau(const WalkConfig& config, int k, double target) {
    if (k < 1 || k > config.shape.n) throw std::out_of_range("stop_tau: depth out of range");
    Walker walker(config);
    return walker.run(StopRule::leaf_sum(k, target));
}

WalkOutcome stop_nu(const WalkConfig& config, int k, double s, double xi) {
    const double theta = s - 2.0 * std::sqrt(s) * xi;
    if (!(theta > 0.0)) {
        WalkOutcome out;
        out.field.shape = config.shape;
        out.field.track_internal = config.track_internal;
        out.field.values.assign(config.shape.vertex_count(), 0.0);
        out.degenerate = true;
        out.xi = xi;
        return out;
    }
    const double target = std::ldexp(theta, k + 1);
    WalkOutcome out = stop_tau(config, k, target);
    out.xi = xi;
    return out;
}

bool hit_before_root(const WalkConfig& config, const VertexRef& target) {
    if (!config.shape.contains(target)) throw std::out_of_range("hit_before_root: target outside shape");
    if (target.depth == 0) throw std::invalid_argument("hit_before_root: target is the root");
    rng::Philox gen(config.seed, rng::stream_id(0x68697442ull, config.replica_id, rng::Lane::Walk));

    // Start at the child of the root on the path to target; pure jump chain,
    // holds are irrelevant for the hitting order.
    int depth = 1;
    std::uint64_t index = ancestor(target, 1).index;
    const int n = config.shape.n;
    for (;;) {
        if (depth == target.depth && index == target.index) return true;
        if (depth == n) {
            index = depth == 1 ? 0 : (index >> 1);
            --depth;
        } else {
            const std::uint32_t r = gen.below(3);
            if (r == 0) {
                if (depth == 1) return false;  // reached the root
                index >>= 1;
                --depth;
            } else {
                index = (index << 1) | (r - 1);
                ++depth;
            }
        }
    }
}

}  // namespace treecover
