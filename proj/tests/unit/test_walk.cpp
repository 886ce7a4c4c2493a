#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "treecover/numeric.hpp"
#include "treecover/oracles.hpp"
#include "treecover/stats.hpp"
#include "treecover/walk.hpp"

using namespace treecover;

namespace {

// One-sample KS p-value against a CDF.
template <typename Cdf>
double ks_one_sample_p(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    const double sn = std::sqrt(n);
    return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

TEST_CASE("zero-time stop leaves everything at zero") {
    const WalkConfig config{make_shape(TreeKind::UnaryRoot, 3), true, 7, 0};
    const WalkOutcome out = simulate(config, StopRule::root_local_time(0.0));
    CHECK(out.field.root_local == 0.0);
    CHECK(out.field.real_elapsed == 0.0);
    for (double v : out.field.values) CHECK(v == 0.0);
    CHECK(out.jump_count == 0);
}

TEST_CASE("root-clock stop is exact and clock-consistent") {
    const WalkConfig config{make_shape(TreeKind::Regular, 5), true, 99, 3};
    Walker walker(config);
    const WalkOutcome out = walker.run(StopRule::root_local_time(25.0));
    CHECK(walker.at_root());
    CHECK(out.field.root_local == 25.0);  // exactly, not approximately
    CHECK(out.field.values[0] == 25.0);
    KahanSum total;
    for (double v : out.field.values) total.add(v);
    CHECK(total.value() == doctest::Approx(out.field.real_elapsed).epsilon(1e-9));
}

TEST_CASE("determinism: identical configuration gives identical outcome") {
    const WalkConfig config{make_shape(TreeKind::Regular, 4), true, 1234, 56};
    const WalkOutcome a = simulate(config, StopRule::root_local_time(9.0));
    const WalkOutcome b = simulate(config, StopRule::root_local_time(9.0));
    CHECK(a.jump_count == b.jump_count);
    CHECK(a.field.real_elapsed == b.field.real_elapsed);
    CHECK(a.field.values == b.field.values);
    const WalkOutcome c = simulate({config.shape, true, 1234, 57}, StopRule::root_local_time(9.0));
    CHECK(a.field.values != c.field.values);
}

TEST_CASE("excursion count on the single-edge tree is Poisson(t)") {
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, 1);
    const double t = 3.0;
    const int replicas = 20000;
    std::vector<std::uint64_t> counts(replicas);
    for (int r = 0; r < replicas; ++r) {
        WalkConfig config{shape, true, 2024, static_cast<std::uint64_t>(r)};
        config.count_visits_at = shape.leaf(0);
        counts[r] = simulate(config, StopRule::root_local_time(t)).visits_at_target;
    }
    const GofResult gof = poisson_gof(counts, t);
    CHECK(!gof.skipped);
    CHECK(gof.p > 0.01);
}

TEST_CASE("leaf visit counts are Poisson(t/n)") {
    const int n = 4;
    const double t = 6.0;
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    const int replicas = 20000;
    std::vector<std::uint64_t> counts(replicas);
    for (int r = 0; r < replicas; ++r) {
        WalkConfig config{shape, true, 77, static_cast<std::uint64_t>(r)};
        config.count_visits_at = shape.leaf(1);
        counts[r] = simulate(config, StopRule::root_local_time(t)).visits_at_target;
    }
    const GofResult gof = poisson_gof(counts, t / n);
    CHECK(!gof.skipped);
    CHECK(gof.p > 0.01);
}

TEST_CASE("real-time occupation approaches the stationary law") {
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, 4);
    const double horizon = 1e6;
    const WalkOutcome out =
        simulate({shape, true, 5150, 0}, StopRule::real_time_limit(horizon));
    CHECK(out.field.real_elapsed == horizon);
    double total_degree = 0.0;
    for (int d = 0; d <= 4; ++d)
        for (std::uint64_t i = 0; i < shape.width(d); ++i)
            total_degree += degree(shape.vertex(d, i), shape);
    for (int d = 0; d <= 4; ++d) {
        for (std::uint64_t i = 0; i < shape.width(d); ++i) {
            const VertexRef v = shape.vertex(d, i);
            const double expected = degree(v, shape) / total_degree;
            CHECK(out.field.at(v) / horizon == doctest::Approx(expected).epsilon(0.05));
        }
    }
}

TEST_CASE("single-edge cover time is standard exponential") {
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, 1);
    const int replicas = 20000;
    std::vector<double> samples(replicas);
    for (int r = 0; r < replicas; ++r) {
        const WalkOutcome out = cover_times({shape, true, 31337, static_cast<std::uint64_t>(r)});
        REQUIRE(out.cover_root_clock.has_value());
        samples[r] = *out.cover_root_clock;
        CHECK(*out.cover_root_clock <= out.field.root_local);
    }
    const double p = ks_one_sample_p(samples, [](double x) { return 1.0 - std::exp(-x); });
    CHECK(p > 0.01);
}

TEST_CASE("cover bookkeeping") {
    const WalkOutcome out = cover_times({make_shape(TreeKind::Regular, 4), true, 8, 0});
    CHECK(out.visited_count == out.field.shape.vertex_count());
    REQUIRE(out.cover_real.has_value());
    REQUIRE(out.cover_root_clock.has_value());
    CHECK(*out.cover_root_clock <= out.field.root_local);
    CHECK(*out.cover_real <= out.field.real_elapsed);
    // The covering vertex was reached at the recorded instant, before holding.
    int zero_leaves = 0;
    for (std::uint64_t i = 0; i < out.field.shape.leaf_count(); ++i)
        if (out.field.at_leaf(i) == 0.0) ++zero_leaves;
    CHECK(zero_leaves <= 1);
}

TEST_CASE("covered stop with an unreachable cap aborts with a flag") {
    const WalkOutcome out =
        simulate({make_shape(TreeKind::Regular, 8), true, 4, 0}, StopRule::covered(0.25));
    CHECK(out.aborted);
    CHECK(out.visited_count < out.field.shape.vertex_count());
}

TEST_CASE("non-visit probability matches the excursion law") {
    const int n = 4;
    const double t = 4.0;
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    const int replicas = 30000;
    int zero = 0;
    for (int r = 0; r < replicas; ++r) {
        const WalkOutcome out =
            simulate({shape, false, 606, static_cast<std::uint64_t>(r)}, StopRule::root_local_time(t));
        if (out.field.at_leaf(2) == 0.0) ++zero;
    }
    const double target = std::exp(-t / n);  // e^{-1}
    const double se = std::sqrt(target * (1.0 - target) / replicas);
    CHECK(std::fabs(zero / static_cast<double>(replicas) - target) < 3.0 * se);
}

TEST_CASE("joint non-visit probability of two leaves sharing a branch") {
    // Two depth-n leaves meeting at depth d: conditioning on the shared
    // ancestor's local time gives exactly exp(-2t/(n+d)).
    const int n = 6;
    const int d = 2;
    const double t = 5.0;
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    const VertexRef x = shape.leaf(0);
    std::uint64_t partner_index = std::uint64_t{1} << (n - d - 1);
    const VertexRef y = shape.leaf(partner_index);
    REQUIRE(meet_depth(x, y) == d);
    const int replicas = 30000;
    int both = 0;
    for (int r = 0; r < replicas; ++r) {
        const WalkOutcome out =
            simulate({shape, false, 11, static_cast<std::uint64_t>(r)}, StopRule::root_local_time(t));
        if (out.field.at(x) == 0.0 && out.field.at(y) == 0.0) ++both;
    }
    const double target = oracles::joint_nonvisit_probability(n, d, t);
    const double se = std::sqrt(target * (1.0 - target) / replicas);
    CHECK(std::fabs(both / static_cast<double>(replicas) - target) < 3.5 * se);
}

TEST_CASE("leaf sums and the running-time identity") {
    const WalkConfig config{make_shape(TreeKind::Regular, 5), true, 2718, 1};
    const WalkOutcome out = simulate(config, StopRule::root_local_time(8.0));
    const LeafSums sums = leaf_sums(out.field, 5);
    // R at full depth is the total real time at the generalized-inverse stop.
    CHECK(sums.R == doctest::Approx(out.field.real_elapsed).epsilon(1e-9));
    CHECK(sums.S_hat == sums.S / 32.0);
    CHECK(sums.R_hat == sums.R / 32.0);

    LocalTimeField empty;
    empty.shape = config.shape;
    empty.values.assign(config.shape.vertex_count(), 0.0);
    const LeafSums zero = leaf_sums(empty, 3);
    CHECK(zero.S == 0.0);
    CHECK(zero.R == 0.0);

    LocalTimeField untracked = out.field;
    untracked.track_internal = false;
    CHECK_THROWS_AS(leaf_sums(untracked, 3), std::logic_error);
}

TEST_CASE("leaf-sum stopping returns to the root after crossing") {
    const int k = 2;
    const double target = 40.0;
    const WalkConfig config{make_shape(TreeKind::Regular, k), true, 13, 2};
    Walker walker(config);
    const WalkOutcome out = walker.run(StopRule::leaf_sum(k, target));
    CHECK(walker.at_root());
    const LeafSums sums = leaf_sums(out.field, k);
    CHECK(2.0 * sums.S > target);
    CHECK(out.field.root_local == out.field.values[0]);
}

TEST_CASE("stopped leaf-sum overshoot has the predicted mean") {
    // S at the stop exceeds 2^k s by the mean number of leaf returns, 2^k - 1.
    const int k = 2;
    const double s = 5.0;
    const double target = std::ldexp(s, k + 1);
    const int replicas = 20000;
    std::vector<double> overshoot(replicas);
    for (int r = 0; r < replicas; ++r) {
        const WalkOutcome out =
            stop_tau({make_shape(TreeKind::Regular, k), true, 500, static_cast<std::uint64_t>(r)}, k,
                     target);
        const LeafSums sums = leaf_sums(out.field, k);
        CHECK(sums.S_hat >= s);  // guaranteed lower bound
        overshoot[r] = sums.S - std::ldexp(s, k);
    }
    const Summary sum = summarize(overshoot);
    const double expected = std::ldexp(1.0, k) - 1.0;
    CHECK(std::fabs(sum.mean - expected) < 3.0 * sum.sd / std::sqrt(replicas));
}

TEST_CASE("compensated stop handles degenerate targets") {
    const WalkConfig config{make_shape(TreeKind::Regular, 3), true, 1, 0};
    const WalkOutcome out = stop_nu(config, 2, 1.0, 10.0);  // theta = 1 - 20 < 0
    CHECK(out.degenerate);
    CHECK(out.xi == 10.0);
    const WalkOutcome ok = stop_nu(config, 2, 4.0, 0.0);  // theta = s exactly
    CHECK(!ok.degenerate);
    const WalkOutcome tau = stop_tau(config, 2, std::ldexp(4.0, 3));
    CHECK(ok.field.values == tau.field.values);  // xi = 0 reduces to the plain stop
}

TEST_CASE("phase snapshots split the clock correctly") {
    const int n = 4;
    const WalkConfig config{make_shape(TreeKind::UnaryRoot, n), true, 9000, 5};
    const PhaseSnapshots phases = run_phases(config, 0.0);
    const CenteringSchedule c = centering(n);
    CHECK(phases.time_a == doctest::Approx(c.time_a));
    CHECK(phases.time_b == doctest::Approx(c.time_b));
    CHECK(phases.snapshot_a.root_local == doctest::Approx(c.time_a));
    CHECK(phases.snapshot_b.root_local == doctest::Approx(c.time_a + c.time_b));
    REQUIRE(phases.phase_b_visited.size() == phases.snapshot_a.shape.leaf_count());
    // A leaf is marked iff its local time grew during phase B.
    for (std::uint64_t i = 0; i < phases.phase_b_visited.size(); ++i) {
        const double delta = phases.snapshot_b.at_leaf(i) - phases.snapshot_a.at_leaf(i);
        CHECK((phases.phase_b_visited[i] == 1) == (delta > 0.0));
    }
}

TEST_CASE("hit before root") {
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, 4);
    const VertexRef target = shape.leaf(0);
    int hits = 0;
    const int excursions = 100000;
    for (int r = 0; r < excursions; ++r)
        if (hit_before_root({shape, false, 4242, static_cast<std::uint64_t>(r)}, target)) ++hits;
    const double target_p = 0.25;
    const double se = std::sqrt(target_p * (1.0 - target_p) / excursions);
    CHECK(std::fabs(hits / static_cast<double>(excursions) - target_p) < 3.0 * se);

    // Starting vertex is always "hit".
    const VertexRef depth1 = shape.vertex(1, 0);
    CHECK(hit_before_root({shape, false, 1, 0}, depth1));
}

TEST_CASE("covariance of leaf local times matches the meet-depth law") {
    const int n = 3;
    const double t = 2.0;
    const TreeShape shape = make_shape(TreeKind::Regular, n);
    const int replicas = 30000;
    std::vector<double> x0(replicas), x_sib(replicas), x_far(replicas);
    for (int r = 0; r < replicas; ++r) {
        const WalkOutcome out =
            simulate({shape, true, 321, static_cast<std::uint64_t>(r)}, StopRule::root_local_time(t));
        x0[r] = out.field.at_leaf(0);
        x_sib[r] = out.field.at_leaf(1);   // meets leaf 0 at depth 2
        x_far[r] = out.field.at_leaf(7);   // meets leaf 0 at the root
    }
    auto check_cov = [&](std::span<const double> ys, double want) {
        const double mx = summarize(x0).mean;
        const double my = summarize(ys).mean;
        std::vector<double> prods(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) prods[i] = (x0[i] - mx) * (ys[i] - my);
        const Summary p = summarize(prods);
        CHECK(std::fabs(p.mean - want) < 3.0 * p.sd / std::sqrt(static_cast<double>(ys.size())));
    };
    check_cov(x_sib, 2.0 * 2 * t);
    check_cov(x_far, 0.0);
    check_cov(x0, 2.0 * 3 * t);  // variance of a single leaf
}
