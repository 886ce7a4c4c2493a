#include "treecover/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treecover/cluster.hpp"
#include "treecover/gff.hpp"
#include "treecover/iso.hpp"
#include "treecover/parallel.hpp"
#include "treecover/walk.hpp"

namespace treecover {

namespace {

const double kLog2 = std::log(2.0);
const double kSqrtLog2 = std::sqrt(kLog2);

TestRecord z_test(const std::string& name, double estimate, double target, double se,
                  double limit = 3.0) {
    TestRecord rec;
    rec.name = name;
    rec.statistic = se > 0.0 ? (estimate - target) / se : 0.0;
    rec.pass = std::fabs(rec.statistic) <= limit;
    return rec;
}

TestRecord proportion_test(const std::string& name, std::uint64_t hits, std::uint64_t trials,
                           double target) {
    const double p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(trials));
    return z_test(name, p_hat, target, se);
}

TestRecord bound_test(const std::string& name, double value, double limit, bool upper = true) {
    TestRecord rec;
    rec.name = name;
    rec.statistic = value;
    rec.pass = upper ? value <= limit : value >= limit;
    return rec;
}

// z statistic for an empirical covariance against a target, with the standard
// error taken from the spread of the centered products.
TestRecord covariance_test(const std::string& name, std::span<const double> xs,
                           std::span<const double> ys, double target) {
    const double mx = summarize(xs).mean;
    const double my = summarize(ys).mean;
    std::vector<double> products(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) products[i] = (xs[i] - mx) * (ys[i] - my);
    const Summary ps = summarize(products);
    return z_test(name, ps.mean, target, ps.sd / std::sqrt(static_cast<double>(products.size())));
}

TestRecord variance_test(const std::string& name, std::span<const double> xs, double target) {
    return covariance_test(name, xs, xs, target);
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentReport hitting_experiment(int n_exact_max, int n_mc, std::uint64_t excursions,
                                    const RunOptions& opt) {
    ExperimentReport report;
    report.name = "hitting";
    report.master_seed = opt.seed;
    report.add_param("n_exact_max", n_exact_max);
    report.add_param("n_mc", n_mc);
    report.add_param("excursions", excursions);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);

    // Exact: from the child of the root straight-line to a depth-n leaf.
    double worst = 0.0;
    for (int n = 2; n <= n_exact_max; ++n) {
        const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
        const VertexRef target = shape.leaf(0);
        const double p = oracles::hitting_probability(shape, ancestor(target, 1), target,
                                                      root_of(shape.kind));
        worst = std::max(worst, std::fabs(p - 1.0 / n));
    }
    report.tests.push_back(bound_test("oracle_inverse_depth_max_abs_err", worst, 1e-10));

    // Path-graph gambler's ruin from every start depth, exhaustive.
    double worst_path = 0.0;
    for (int n = 2; n <= std::min(n_exact_max, 10); ++n) {
        const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
        const VertexRef target = shape.leaf(0);
        for (int d = 1; d < n; ++d) {
            const double p = oracles::hitting_probability(shape, ancestor(target, d), target,
                                                          root_of(shape.kind));
            worst_path = std::max(worst_path, std::fabs(p - static_cast<double>(d) / n));
        }
    }
    report.tests.push_back(bound_test("oracle_path_ruin_max_abs_err", worst_path, 1e-10));

    // Monte Carlo excursions at n_mc.
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n_mc);
    const VertexRef target = shape.leaf(0);
    std::vector<std::uint8_t> hit(excursions, 0);
    parallel_for(excursions, opt.workers, [&](std::size_t r) {
        WalkConfig config{shape, false, seed, r};
        hit[r] = hit_before_root(config, target) ? 1 : 0;
    });
    std::uint64_t hits = 0;
    for (auto h : hit) hits += h;
    report.tests.push_back(
        proportion_test("mc_hit_probability", hits, excursions, 1.0 / n_mc));
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport moments_experiment(int n, double t, int replicas, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "moments";
    report.master_seed = opt.seed;
    report.add_param("n", n);
    report.add_param("t", t);
    report.add_param("replicas", replicas);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const TreeShape shape = make_shape(TreeKind::Regular, n);

    // Leaf pairs with one representative per meet depth, all against leaf 0.
    std::vector<std::uint64_t> partner(n + 1);
    for (int d = 0; d <= n; ++d)
        partner[d] = d == n ? 0 : (std::uint64_t{1} << (n - d - 1));  // meets leaf 0 at depth d

    std::vector<double> s_samples(replicas), r_samples(replicas), leaf0(replicas);
    std::vector<std::vector<double>> partners(n + 1, std::vector<double>(replicas));
    parallel_for(replicas, opt.workers, [&](std::size_t r) {
        WalkConfig config{shape, true, seed, r};
        const WalkOutcome out = simulate(config, StopRule::root_local_time(t));
        const LeafSums sums = leaf_sums(out.field, n);
        s_samples[r] = sums.S;
        r_samples[r] = sums.R;
        leaf0[r] = out.field.at_leaf(0);
        for (int d = 0; d <= n; ++d) partners[d][r] = out.field.at_leaf(partner[d]);
    });

    const auto exact = oracles::exact_moments(n, t, TreeKind::Regular);
    {
        const Summary s = summarize(s_samples);
        report.tests.push_back(z_test("mean_S", s.mean, exact.mean_S,
                                      s.sd / std::sqrt(static_cast<double>(replicas))));
        const Summary rsum = summarize(r_samples);
        report.tests.push_back(z_test("mean_R", rsum.mean, exact.mean_R,
                                      rsum.sd / std::sqrt(static_cast<double>(replicas))));
        report.tests.push_back(variance_test("var_S_exact_sum", s_samples, exact.var_S));
    }
    for (int d = 0; d <= n; ++d) {
        report.tests.push_back(covariance_test("cov_meet_depth_" + std::to_string(d), leaf0,
                                               partners[d], exact.cov_by_meet_depth.at(d)));
    }
    StatRecord sstat;
    sstat.name = "leaf_sum_S";
    sstat.samples = std::move(s_samples);
    report.stats.push_back(std::move(sstat));
    StatRecord rstat;
    rstat.name = "running_sum_R";
    rstat.samples = std::move(r_samples);
    report.stats.push_back(std::move(rstat));
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport bessel_experiment(const BesselConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "bessel";
    report.master_seed = opt.seed;
    report.add_param("n", config.n);
    report.add_param("k", config.k);
    report.add_param("t", config.t);
    report.add_param("replicas", config.replicas);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, config.n);
    const VertexRef leaf = shape.leaf(0);
    const VertexRef branch = ancestor(leaf, config.k);

    std::vector<std::uint8_t> atom_hits(config.replicas);
    std::vector<std::uint8_t> tail_hits(config.replicas);
    std::vector<double> branch_values(config.replicas);
    parallel_for(config.replicas, opt.workers, [&](std::size_t r) {
        WalkConfig wc{shape, true, seed, r};
        const WalkOutcome out = simulate(wc, StopRule::root_local_time(config.t));
        const double v = out.field.at(branch);
        branch_values[r] = v;
        atom_hits[r] = v == 0.0 ? 1 : 0;
        tail_hits[r] = out.field.at(leaf) > config.tail_threshold ? 1 : 0;
    });
    std::uint64_t atom = 0;
    for (auto h : atom_hits) atom += h;
    report.tests.push_back(proportion_test("branch_atom", atom, config.replicas,
                                           oracles::bessel_atom(config.t, config.k)));

    if (config.girsanov) {
        // Two-sided cross-check of P(Y_n > a, Y_n != 0) via reweighted Brownian
        // paths against the direct simulation of the full branch.
        std::uint64_t deep_tail = 0;
        for (auto h : tail_hits) deep_tail += h;
        const double direct = static_cast<double>(deep_tail) / static_cast<double>(config.replicas);
        oracles::GirsanovConfig gc;
        gc.dt = config.dt;
        gc.paths = config.girsanov_paths;
        gc.seed = seed ^ 0x6769;
        gc.workers = opt.workers;
        const double weighted = oracles::bessel_girsanov_estimate(
            config.t, config.n,
            [&](std::span<const double> y) { return y[config.n] > config.tail_threshold ? 1.0 : 0.0; },
            gc);
        TestRecord rec;
        rec.name = "girsanov_vs_direct_rel_err";
        rec.statistic = direct > 0.0 ? std::fabs(weighted - direct) / direct : 0.0;
        rec.pass = rec.statistic <= 0.05;
        rec.note = "tolerance calibrated from pilot variance";
        report.tests.push_back(rec);
    }

    StatRecord rec;
    rec.name = "branch_local_time";
    rec.samples = std::move(branch_values);
    rec.dump_samples = false;
    report.stats.push_back(std::move(rec));
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport iso_grid_experiment(const std::vector<int>& ns, const std::vector<double>& ts,
                                     int samples, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "iso-test";
    report.master_seed = opt.seed;
    report.add_param("samples", samples);
    for (int n : ns) {
        for (double t : ts) {
            IsoTestConfig cfg;
            cfg.samples = samples;
            cfg.seed = rng::experiment_seed(opt.seed, "iso_" + std::to_string(n) + "_" + std::to_string(t));
            cfg.workers = opt.workers;
            ExperimentReport sub = iso_distribution_test(n, t, cfg);
            const std::string prefix = "n" + std::to_string(n) + "_t" + std::to_string(t) + "_";
            bool pass = sub.all_pass();
            TestRecord rec;
            rec.name = prefix + "verdict";
            rec.statistic = pass ? 1.0 : 0.0;
            rec.pass = pass;
            report.tests.push_back(rec);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport martingale_experiment(const MartingaleConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "martingale";
    report.master_seed = opt.seed;
    report.add_param("ks_depth", config.ks_depth);
    report.add_param("ks_samples", config.ks_samples);
    report.add_param("series_depth", config.series_depth);
    report.add_param("series_samples", config.series_samples);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const TreeShape regular{TreeKind::Regular, config.ks_depth};
    const TreeShape unary{TreeKind::UnaryRoot, config.ks_depth};

    std::vector<double> two_z(config.ks_samples), zbar_sum(config.ks_samples);
    parallel_for(config.ks_samples, opt.workers, [&](std::size_t r) {
        auto gen = rng::Philox(seed, rng::stream_id(0x6d617274ull, r, rng::Lane::FieldA));
        const GaussianField h = sample_dgff(regular, gen);
        two_z[r] = 2.0 * derivative_martingale(h, config.ks_depth);
        auto gen_l = rng::Philox(seed, rng::stream_id(0x6d617274ull, r, rng::Lane::FieldB));
        auto gen_r = rng::Philox(seed, rng::stream_id(0x6d617274ull, r, rng::Lane::Scalar));
        const GaussianField hl = sample_dgff(unary, gen_l);
        const GaussianField hr = sample_dgff(unary, gen_r);
        zbar_sum[r] = derivative_martingale(hl, config.ks_depth) +
                      derivative_martingale(hr, config.ks_depth);
    });
    {
        const KsResult ks = ks_two_sample(two_z, zbar_sum);
        TestRecord rec;
        rec.name = "two_z_vs_split_ks";
        rec.statistic = ks.statistic;
        rec.p = ks.p;
        rec.pass = ks.p > 0.01;
        rec.note = "finite truncation depth; calibrated, not paper-derived";
        report.tests.push_back(rec);
    }

    if (config.series_samples > 0) {
        // Stabilization of the series and decay of the exponential variant,
        // along independent realizations.
        const int top = config.series_depth;
        std::vector<std::vector<double>> diffs(top + 1);
        std::vector<std::vector<double>> expo(top + 1);
        for (auto& v : diffs) v.resize(config.series_samples);
        for (auto& v : expo) v.resize(config.series_samples);
        parallel_for(config.series_samples, std::min(opt.workers, 2), [&](std::size_t r) {
            auto gen = rng::Philox(seed, rng::stream_id(0x73657269ull, r, rng::Lane::FieldA));
            const MartingaleSeries series =
                sample_martingale_series(TreeKind::Regular, top, gen);
            for (int d = 1; d <= top; ++d) {
                diffs[d][r] = d >= 2 ? std::fabs(series.terms[d - 1].derivative -
                                                 series.terms[d - 2].derivative)
                                     : 0.0;
                expo[d][r] = series.terms[d - 1].exponential;
            }
        });
        std::vector<int> checkpoints;
        for (int d = std::max(config.series_from + 3, 8); d <= top; d += 4) checkpoints.push_back(d);
        double prev = -1.0;
        bool monotone = true;
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            const double med = median(diffs[checkpoints[i]]);
            if (i > 0 && med > 1.3 * prev) monotone = false;
            prev = med;
        }
        TestRecord rec;
        rec.name = "series_increment_medians_nonincreasing";
        rec.statistic = prev;
        rec.pass = monotone && !checkpoints.empty() &&
                   median(diffs[checkpoints.back()]) < median(diffs[checkpoints.front()]);
        rec.note = "tolerance 1.3x between checkpoints; calibrated, not paper-derived";
        report.tests.push_back(rec);

        const double med_hi = median(expo[top]);
        const double med_lo = median(expo[config.series_from]);
        TestRecord dec;
        dec.name = "exponential_variant_decay";
        dec.statistic = med_lo > 0.0 ? med_hi / med_lo : 0.0;
        dec.pass = med_hi < 0.10 * med_lo;
        dec.note = "threshold calibrated, not paper-derived";
        report.tests.push_back(dec);
    }
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport negcorr_experiment(int exact_depth, int empirical_depth, int empirical_samples,
                                    const RunOptions& opt) {
    ExperimentReport report;
    report.name = "negcorr";
    report.master_seed = opt.seed;
    report.add_param("exact_depth", exact_depth);
    report.add_param("empirical_depth", empirical_depth);
    report.add_param("empirical_samples", empirical_samples);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);

    // Deterministic check of the edge covariances against the target matrix:
    // 1/2 on the diagonal, -2^{-(m+1)} for cross-copy generation-m pairs,
    // zero otherwise.
    const TreeShape copy{TreeKind::Regular, exact_depth};
    double worst = 0.0;
    for (int copy_a = 1; copy_a <= 2; ++copy_a) {
        for (int copy_b = copy_a; copy_b <= 2; ++copy_b) {
            for (int da = 1; da <= exact_depth; ++da) {
                for (std::uint64_t ia = 0; ia < copy.width(da); ++ia) {
                    for (int db = da; db <= exact_depth; ++db) {
                        for (std::uint64_t ib = 0; ib < copy.width(db); ++ib) {
                            const VertexRef a = copy.vertex(da, ia);
                            const VertexRef b = copy.vertex(db, ib);
                            const double got = negcorr_edge_covariance(copy_a, a, copy_b, b);
                            double want = 0.0;
                            if (copy_a == copy_b && a == b) want = 0.5;
                            else if (copy_a != copy_b && da == db) want = -std::exp2(-(da + 1));
                            worst = std::max(worst, std::fabs(got - want));
                        }
                    }
                }
            }
        }
    }
    report.tests.push_back(bound_test("edge_covariance_max_abs_err", worst, 1e-12));

    // Empirical covariances of the sampled field.
    const TreeShape emp{TreeKind::Regular, empirical_depth};
    const VertexRef x = emp.vertex(2, 0);
    const VertexRef y2 = emp.vertex(2, 3);  // meets x at the root
    const VertexRef y1 = emp.vertex(2, 1);  // sibling, meets x at depth 1
    std::vector<double> h1x(empirical_samples), h2x(empirical_samples), h1y1(empirical_samples),
        h1y2(empirical_samples);
    parallel_for(empirical_samples, opt.workers, [&](std::size_t r) {
        auto gen = rng::Philox(seed, rng::stream_id(0x6e656763ull, r, rng::Lane::FieldA));
        const NegCorrField f = sample_negcorr(empirical_depth, gen, false);
        h1x[r] = f.copy_value(1, x);
        h2x[r] = f.copy_value(2, x);
        h1y1[r] = f.copy_value(1, y1);
        h1y2[r] = f.copy_value(1, y2);
    });
    report.tests.push_back(covariance_test(
        "cross_copy_cov_depth2", h1x, h2x,
        negcorr_covariance_oracle({1, x}, {2, x})));
    report.tests.push_back(covariance_test("within_copy_cov_meet1", h1x, h1y1, 0.5));
    report.tests.push_back(covariance_test("within_copy_cov_meet0", h1x, h1y2, 0.0));
    report.tests.push_back(variance_test("within_copy_var_depth2", h1x, 1.0));
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport zlambda_experiment(int depth, int samples, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "zlambda";
    report.master_seed = opt.seed;
    report.add_param("depth", depth);
    report.add_param("samples", samples);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const TreeShape regular{TreeKind::Regular, depth};

    std::vector<double> z_scaled(samples), z_plain(samples);
    parallel_for(samples, opt.workers, [&](std::size_t r) {
        auto gen = rng::Philox(seed, rng::stream_id(0x7a6c616dull, r, rng::Lane::FieldA));
        const NegCorrField f = sample_negcorr(depth, gen, false);
        const TreeShape copy = f.copy_shape();
        const std::uint64_t off = copy.level_offset(depth);
        const std::uint64_t w = copy.width(depth);
        const double z1 = derivative_martingale_level(
            {f.h1.data() + off, w}, depth, TreeKind::Regular);
        const double z2 = derivative_martingale_level(
            {f.h2.data() + off, w}, depth, TreeKind::Regular);
        auto scalar = rng::Philox(seed, rng::stream_id(0x7a6c616dull, r, rng::Lane::Scalar));
        z_scaled[r] = (z1 + z2) * sample_lambda(scalar);
        auto gen_z = rng::Philox(seed, rng::stream_id(0x7a6c616dull, r, rng::Lane::FieldB));
        const GaussianField h = sample_dgff(regular, gen_z);
        z_plain[r] = derivative_martingale(h, depth);
    });
    const KsResult ks = ks_two_sample(z_scaled, z_plain);
    TestRecord rec;
    rec.name = "scaled_sum_vs_z_ks";
    rec.statistic = ks.statistic;
    rec.p = ks.p;
    rec.pass = ks.p > 0.01;
    rec.note = "finite truncation depth; calibrated, not paper-derived";
    report.tests.push_back(rec);
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport tau_clt_experiment(const TauCltConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "tau-clt";
    report.master_seed = opt.seed;
    report.add_param("n", config.n);
    report.add_param("k", config.k);
    report.add_param("s", config.s);
    report.add_param("replicas", config.replicas);
    report.add_param("nu_replicas", config.nu_replicas);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const int k = config.k;
    const double s = config.s;
    const double sqrt_s = std::sqrt(s);

    // The leaf field at depth k has the same law on any deeper tree, so the
    // stopped-field statistics run on the depth-k tree itself.
    const TreeShape shape = make_shape(TreeKind::Regular, k);
    const std::uint64_t leaves = shape.leaf_count();
    const double target = std::ldexp(s, k + 1);

    std::vector<std::vector<double>> tau_field(leaves), fixed_field(leaves), nu_sqrt(leaves),
        fixed_sqrt(leaves);
    for (auto& v : tau_field) v.resize(config.replicas);
    for (auto& v : fixed_field) v.resize(config.replicas);
    for (auto& v : nu_sqrt) v.resize(config.replicas);
    for (auto& v : fixed_sqrt) v.resize(config.replicas);

    parallel_for(config.replicas, opt.workers, [&](std::size_t r) {
        WalkConfig tau_cfg{shape, false, seed, 4 * r};
        const WalkOutcome tau_out = stop_tau(tau_cfg, k, target);
        WalkConfig fixed_cfg{shape, false, seed, 4 * r + 1};
        const WalkOutcome fixed_out = simulate(fixed_cfg, StopRule::root_local_time(s));
        auto scalar = rng::Philox(seed, rng::stream_id(0x7461754bull, r, rng::Lane::Scalar));
        const double xi = scalar.normal(0.0, 0.5);
        WalkConfig nu_cfg{shape, false, seed, 4 * r + 2};
        const WalkOutcome nu_out = stop_nu(nu_cfg, k, s, xi);
        for (std::uint64_t x = 0; x < leaves; ++x) {
            tau_field[x][r] = (tau_out.field.at_leaf(x) - s) / sqrt_s;
            fixed_field[x][r] = (fixed_out.field.at_leaf(x) - s) / sqrt_s;
            nu_sqrt[x][r] = nu_out.degenerate ? 0.0 : std::sqrt(nu_out.field.at_leaf(x));
            fixed_sqrt[x][r] = std::sqrt(fixed_out.field.at_leaf(x));
        }
    });

    // Covariances: stopped field against 2(|x^y|-1), fixed clock against 2|x^y|.
    for (int d = 0; d <= k; ++d) {
        const std::uint64_t partner = d == k ? 0 : (std::uint64_t{1} << (k - d - 1));
        report.tests.push_back(covariance_test("tau_cov_meet" + std::to_string(d), tau_field[0],
                                               tau_field[partner], 2.0 * (d - 1)));
        report.tests.push_back(covariance_test("fixed_cov_meet" + std::to_string(d), fixed_field[0],
                                               fixed_field[partner], 2.0 * d));
    }
    {
        // Marginal KS between the compensated-stop and fixed-clock sqrt fields.
        const KsResult ks = ks_two_sample(nu_sqrt[0], fixed_sqrt[0]);
        TestRecord rec;
        rec.name = "nu_vs_fixed_sqrt_marginal_ks";
        rec.statistic = ks.statistic;
        rec.p = ks.p;
        rec.pass = ks.p > 0.01;
        report.tests.push_back(rec);
    }

    if (config.nu_replicas > 0) {
        // Real-clock consistency on the full depth-n tree.
        const TreeShape full = make_shape(TreeKind::Regular, config.n);
        std::vector<double> dev(config.nu_replicas, -1.0);
        parallel_for(config.nu_replicas, opt.workers, [&](std::size_t r) {
            auto scalar = rng::Philox(seed, rng::stream_id(0x6e754b32ull, r, rng::Lane::Scalar));
            const double xi = scalar.normal(0.0, 0.5);
            WalkConfig cfg{full, false, seed, (std::uint64_t{1} << 32) + r};
            const WalkOutcome out = stop_nu(cfg, k, s, xi);
            if (out.degenerate) return;  // excluded, reported below
            const double scaled = std::ldexp(out.field.real_elapsed, -(config.n + 1));
            dev[r] = std::fabs(std::sqrt(scaled) + xi - sqrt_s);
        });
        std::vector<double> kept;
        kept.reserve(dev.size());
        int excluded = 0;
        for (double v : dev) {
            if (v < 0.0) ++excluded;
            else kept.push_back(v);
        }
        report.add_param("nu_degenerate_excluded", static_cast<std::uint64_t>(excluded));
        TestRecord rec;
        rec.name = "nu_sqrt_consistency_p90";
        rec.statistic = kept.empty() ? 0.0 : quantile(kept, 0.90);
        rec.pass = !kept.empty() && rec.statistic < config.nu_p90_limit;
        rec.note = "tolerance derived by pilot runs";
        report.tests.push_back(rec);
        StatRecord stat;
        stat.name = "nu_sqrt_deviation";
        stat.samples = std::move(kept);
        report.stats.push_back(std::move(stat));
    }
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport rhat_experiment(const RhatConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "rhat";
    report.master_seed = opt.seed;
    report.add_param("n", config.n);
    report.add_param("k", config.k);
    report.add_param("s", config.s);
    report.add_param("epsilon", config.epsilon);
    report.add_param("replicas", config.replicas);
    report.add_param("fitted_C", config.fitted_C);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);
    const TreeShape shape = make_shape(TreeKind::Regular, config.n);
    const double target = std::ldexp(config.s, config.k + 1);

    std::vector<double> gap(config.replicas), s_hat(config.replicas);
    parallel_for(config.replicas, opt.workers, [&](std::size_t r) {
        WalkConfig cfg{shape, true, seed, r};
        const WalkOutcome out = stop_tau(cfg, config.k, target);
        const LeafSums top = leaf_sums(out.field, config.k);
        const double r_hat = std::ldexp(out.field.real_elapsed, -config.n);
        gap[r] = std::fabs(r_hat - 2.0 * top.S_hat);
        s_hat[r] = top.S_hat;
    });
    std::uint64_t exceed = 0;
    for (double g : gap)
        if (g > config.epsilon) ++exceed;
    const double p_emp = static_cast<double>(exceed) / config.replicas;
    const double mean_s_hat = summarize(s_hat).mean;
    const double bound = config.fitted_C *
                         (std::ldexp(1.0, -config.k) / (config.epsilon * config.epsilon) +
                          std::ldexp(1.0, -(config.n - config.k)) / config.epsilon) *
                         mean_s_hat;
    TestRecord rec;
    rec.name = "gap_probability_below_bound";
    rec.statistic = bound > 0.0 ? p_emp / bound : 0.0;
    rec.pass = p_emp <= bound;
    rec.note = "one-sided; C fitted once on a pilot configuration";
    report.tests.push_back(rec);
    StatRecord stat;
    stat.name = "rhat_gap";
    stat.samples = std::move(gap);
    report.stats.push_back(std::move(stat));
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport cover_experiment(const CoverConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "cover";
    report.master_seed = opt.seed;
    report.add_param("replicas", config.replicas);
    {
        std::string ns;
        for (int n : config.n_list) ns += (ns.empty() ? "" : ",") + std::to_string(n);
        report.add_param("n_list", ns);
    }
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);

    std::vector<std::vector<double>> sqrt_centered(config.n_list.size());
    std::vector<std::vector<double>> linear_centered(config.n_list.size());
    std::vector<double> mean_real(config.n_list.size());
    for (std::size_t i = 0; i < config.n_list.size(); ++i) {
        const int n = config.n_list[i];
        const CenteringSchedule c = centering(n);
        const TreeShape shape = make_shape(TreeKind::Regular, n);
        std::vector<double> root_cover(config.replicas), real_cover(config.replicas);
        parallel_for(config.replicas, opt.workers, [&](std::size_t r) {
            WalkConfig cfg{shape, true, seed, (static_cast<std::uint64_t>(i) << 40) + r};
            const WalkOutcome out = cover_times(cfg);
            root_cover[r] = *out.cover_root_clock;
            real_cover[r] = *out.cover_real;
        });
        sqrt_centered[i].resize(config.replicas);
        linear_centered[i].resize(config.replicas);
        for (int r = 0; r < config.replicas; ++r) {
            sqrt_centered[i][r] = std::sqrt(root_cover[r]) - c.sqrt_time_cover;
            linear_centered[i][r] = real_cover[r] / c.linear_scale - c.linear_center;
        }
        mean_real[i] = summarize(real_cover).mean;

        report.tests.push_back(bound_test("iqr_sqrt_cover_n" + std::to_string(n),
                                          interquartile_range(sqrt_centered[i]), config.iqr_limit));
        StatRecord s1;
        s1.name = "sqrt_cover_centered_n" + std::to_string(n);
        s1.samples = sqrt_centered[i];
        report.stats.push_back(std::move(s1));
        StatRecord s2;
        s2.name = "real_cover_centered_n" + std::to_string(n);
        s2.samples = linear_centered[i];
        report.stats.push_back(std::move(s2));
    }

    for (std::size_t i = 0; i + 1 < config.n_list.size(); ++i) {
        const std::string pair =
            std::to_string(config.n_list[i]) + "_" + std::to_string(config.n_list[i + 1]);
        {
            const KsResult ks = ks_two_sample(sqrt_centered[i], sqrt_centered[i + 1]);
            TestRecord rec;
            rec.name = "cross_n_ks_sqrt_" + pair;
            rec.statistic = ks.statistic;
            rec.p = ks.p;
            rec.pass = ks.p > config.ks_alpha;
            rec.note = "consistency with a common limit, not a confirmation of its constants";
            report.tests.push_back(rec);
        }
        {
            const KsResult ks = ks_two_sample(linear_centered[i], linear_centered[i + 1]);
            TestRecord rec;
            rec.name = "cross_n_ks_linear_" + pair;
            rec.statistic = ks.statistic;
            rec.p = ks.p;
            rec.pass = ks.p > config.ks_alpha;
            rec.note = "consistency with a common limit, not a confirmation of its constants";
            report.tests.push_back(rec);
        }
        const double drift = std::fabs(median(sqrt_centered[i + 1]) - median(sqrt_centered[i]));
        report.tests.push_back(
            bound_test("median_drift_sqrt_" + pair, drift, config.median_drift_limit));
    }

    // Right-tail log-survival slope of the linear statistic at the deepest n.
    if (!config.n_list.empty()) {
        std::vector<double> xs = linear_centered.back();
        std::sort(xs.begin(), xs.end());
        const std::size_t total = xs.size();
        std::vector<double> tx, ty;
        for (std::size_t i = 0; i < total; ++i) {
            const double sf = static_cast<double>(total - i) / static_cast<double>(total);
            if (sf <= 0.20 && sf >= 0.01) {
                tx.push_back(xs[i]);
                ty.push_back(std::log(sf));
            }
        }
        double slope = 0.0;
        if (tx.size() >= 10) {
            const double mx = summarize(tx).mean;
            const double my = summarize(ty).mean;
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < tx.size(); ++i) {
                num += (tx[i] - mx) * (ty[i] - my);
                den += (tx[i] - mx) * (tx[i] - mx);
            }
            slope = den > 0.0 ? num / den : 0.0;
        }
        TestRecord rec;
        rec.name = "tail_log_survival_slope";
        rec.statistic = slope;
        rec.pass = slope >= config.tail_slope_lo && slope <= config.tail_slope_hi;
        rec.note = "rate-one tail; fitted on survival in [0.01, 0.20]";
        report.tests.push_back(rec);
    }

    for (std::size_t i = 0; i < config.n_list.size(); ++i) {
        if (config.n_list[i] != config.leading_order_n) continue;
        const int n = config.n_list[i];
        const double leading = kLog2 * std::ldexp(static_cast<double>(n) * n, n + 1);
        TestRecord rec;
        rec.name = "mean_real_cover_vs_leading_order_n" + std::to_string(n);
        rec.statistic = mean_real[i] / leading;
        rec.pass = std::fabs(rec.statistic - 1.0) <= config.leading_order_tol;
        rec.note = "loose tolerance; lower-order corrections present";
        report.tests.push_back(rec);
    }
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport phase_ab_experiment(const PhaseAbConfig& config, const RunOptions& opt) {
    ExperimentReport report;
    report.name = "phase-ab";
    report.master_seed = opt.seed;
    report.add_param("eta", config.eta);
    report.add_param("eta_prime", config.eta_prime);
    const std::uint64_t seed = rng::experiment_seed(opt.seed, report.name);

    // Cross-depth stability of the scaled zero-cluster count after phase A.
    if (config.stability_replicas > 0 && config.stability_ns.size() >= 2) {
        std::vector<std::vector<double>> counts(config.stability_ns.size());
        for (std::size_t i = 0; i < config.stability_ns.size(); ++i) {
            const int n = config.stability_ns[i];
            const CenteringSchedule c = centering(n);
            const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
            counts[i].resize(config.stability_replicas);
            parallel_for(config.stability_replicas, opt.workers, [&](std::size_t r) {
                WalkConfig cfg{shape, false, seed, (static_cast<std::uint64_t>(i) << 40) + r};
                const WalkOutcome out = simulate(cfg, StopRule::root_local_time(c.time_a));
                counts[i][r] = cluster_count_statistic(out.field, n, config.eta);
            });
            StatRecord rec;
            rec.name = "scaled_cluster_count_n" + std::to_string(n);
            rec.samples = counts[i];
            report.stats.push_back(std::move(rec));
        }
        for (std::size_t i = 0; i + 1 < config.stability_ns.size(); ++i) {
            const KsResult ks = ks_two_sample(counts[i], counts[i + 1]);
            TestRecord rec;
            rec.name = "cluster_count_ks_" + std::to_string(config.stability_ns[i]) + "_" +
                       std::to_string(config.stability_ns[i + 1]);
            rec.statistic = ks.statistic;
            rec.p = ks.p;
            rec.pass = ks.p > 0.01;
            rec.note = "desk-scale surrogate of a common weak limit";
            report.tests.push_back(rec);
        }
    }

    // Overdispersion of the Gaussian sub-level cluster counts.
    if (config.overdisp_replicas > 0) {
        const int n = config.overdisp_n;
        const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
        const double m_n = centering(n).m_n;
        const int anc_depth = n - config.overdisp_r;
        std::vector<std::uint64_t> counts(config.overdisp_replicas);
        parallel_for(config.overdisp_replicas, opt.workers, [&](std::size_t r) {
            auto gen = rng::Philox(seed, rng::stream_id(0x6f766572ull, r, rng::Lane::FieldA));
            const GaussianField h = sample_dgff(shape, gen);
            const std::uint64_t off = shape.level_offset(n);
            std::vector<std::uint64_t> ancestors;
            for (std::uint64_t x = 0; x < shape.leaf_count(); ++x) {
                const double v = h.values[off + x] + m_n;
                if (v * v <= config.overdisp_u)
                    ancestors.push_back(ancestor(shape.leaf(x), anc_depth).index);
            }
            std::sort(ancestors.begin(), ancestors.end());
            counts[r] = static_cast<std::uint64_t>(
                std::unique(ancestors.begin(), ancestors.end()) - ancestors.begin());
        });
        const double disp = dispersion(counts);
        const BootstrapCi ci = dispersion_bootstrap_ci(counts, 0.99, 2000, seed ^ 0xd15);
        TestRecord rec;
        rec.name = "sublevel_cluster_overdispersion";
        rec.statistic = disp;
        rec.pass = disp > 1.0 && ci.lo > 1.0;
        rec.note = "99% bootstrap CI must exclude 1";
        report.tests.push_back(rec);
        report.add_param("overdispersion_ci_lo", ci.lo);
        report.add_param("overdispersion_ci_hi", ci.hi);
    }

    // Planted phase-B survival: independent singleton clusters, each on its
    // own tree, so the survival count is exactly binomial.
    for (std::size_t si = 0; si < config.planted_s.size(); ++si) {
        const double s = config.planted_s[si];
        const int replicas =
            si < config.planted_replicas.size() ? config.planted_replicas[si] : 10000;
        if (replicas <= 0) continue;
        const int n = config.planted_n;
        const int M = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const double t = centering(n).time_b + s * n;
        const double q = std::exp(-t / n);  // = e^{-s}/sqrt(n)
        const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
        std::vector<std::uint64_t> counts(replicas, 0);
        parallel_for(replicas, opt.workers, [&](std::size_t r) {
            std::uint64_t c = 0;
            for (int j = 0; j < M; ++j) {
                WalkConfig cfg{shape, false, seed,
                               (static_cast<std::uint64_t>(si + 1) << 48) +
                                   static_cast<std::uint64_t>(r) * M + j};
                const WalkOutcome out = simulate(cfg, StopRule::root_local_time(t));
                if (out.field.at_leaf(0) == 0.0) ++c;
            }
            counts[r] = c;
        });
        std::uint64_t total_unvisited = 0;
        for (auto c : counts) total_unvisited += c;
        const std::string suffix = "_s" + std::to_string(si);
        const GofResult gof = binomial_gof(counts, M, q);
        TestRecord rec;
        rec.name = "planted_survival_binomial_gof" + suffix;
        rec.statistic = gof.chi2;
        rec.p = gof.skipped ? 1.0 : gof.p;
        rec.pass = gof.skipped || gof.p > 0.01;
        report.tests.push_back(rec);
        report.tests.push_back(proportion_test("planted_marginal_nonvisit" + suffix,
                                               total_unvisited,
                                               static_cast<std::uint64_t>(replicas) * M, q));
    }

    // Soft entropic repulsion: scaled count of phase-A zero-set leaves whose
    // branch trajectory dips below the repulsion threshold.
    if (config.repulsion_replicas > 0 && !config.repulsion_ns.empty()) {
        std::vector<double> means(config.repulsion_ns.size());
        for (std::size_t i = 0; i < config.repulsion_ns.size(); ++i) {
            const int n = config.repulsion_ns[i];
            const CenteringSchedule c = centering(n);
            const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
            TrajectoryParams params;
            params.eta = config.eta;
            params.eta_prime = config.eta_prime;
            params.u = 0.0;
            std::vector<double> scaled(config.repulsion_replicas);
            parallel_for(config.repulsion_replicas, opt.workers, [&](std::size_t r) {
                WalkConfig cfg{shape, true, seed, (static_cast<std::uint64_t>(i + 8) << 40) + r};
                const WalkOutcome out = simulate(cfg, StopRule::root_local_time(c.time_a));
                const TrajectoryClass cls = classify_trajectories(out.field, params);
                std::uint64_t failing = 0;
                for (const auto& leaf : cls.leaves)
                    if (!leaf.soft_repelled) ++failing;
                scaled[r] = static_cast<double>(failing) / std::sqrt(static_cast<double>(n));
            });
            means[i] = summarize(scaled).mean;
            StatRecord rec;
            rec.name = "repulsion_failures_scaled_n" + std::to_string(n);
            rec.samples = std::move(scaled);
            report.stats.push_back(std::move(rec));
        }
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < means.size(); ++i)
            if (!(means[i + 1] < means[i])) decreasing = false;
        TestRecord rec;
        rec.name = "repulsion_failures_decreasing";
        rec.statistic = means.empty() ? 0.0 : means.back();
        rec.pass = decreasing;
        rec.note = "threshold derived by pilot runs";
        report.tests.push_back(rec);
    }
    report.apply_holm();
    return report;
}

// ---------------------------------------------------------------------------

SuiteResult full_suite(SuiteScale scale, const RunOptions& opt) {
    SuiteResult result;
    const bool desk = scale == SuiteScale::Desk;

    result.reports.push_back(hitting_experiment(desk ? 10 : 6, desk ? 8 : 6,
                                                desk ? 200000 : 20000, opt));
    result.reports.push_back(
        moments_experiment(desk ? 6 : 4, desk ? 10.0 : 2.0, desk ? 20000 : 4000, opt));
    {
        BesselConfig cfg;
        if (!desk) {
            cfg.n = 6;
            cfg.k = 3;
            cfg.t = 4.0;
            cfg.replicas = 20000;
        }
        result.reports.push_back(bessel_experiment(cfg, opt));
    }
    result.reports.push_back(desk ? iso_grid_experiment({1, 2, 3}, {1.0, 4.0}, 100000, opt)
                                  : iso_grid_experiment({2}, {1.0}, 20000, opt));
    {
        MartingaleConfig cfg;
        if (!desk) {
            cfg.ks_depth = 10;
            cfg.ks_samples = 2000;
            cfg.series_depth = 14;
            cfg.series_samples = 12;
        }
        result.reports.push_back(martingale_experiment(cfg, opt));
    }
    result.reports.push_back(negcorr_experiment(desk ? 8 : 6, desk ? 8 : 6,
                                                desk ? 100000 : 20000, opt));
    result.reports.push_back(zlambda_experiment(desk ? 16 : 10, desk ? 10000 : 2000, opt));
    {
        TauCltConfig cfg;
        if (!desk) {
            cfg.n = 10;
            cfg.k = 3;
            cfg.s = 100.0;
            cfg.replicas = 3000;
            cfg.nu_replicas = 0;
        } else {
            cfg.nu_replicas = 48;
            cfg.n = 16;
            cfg.k = 8;
        }
        result.reports.push_back(tau_clt_experiment(cfg, opt));
    }
    {
        RhatConfig cfg;
        if (!desk) {
            cfg.n = 10;
            cfg.k = 5;
            cfg.s = 50.0;
            cfg.replicas = 400;
        }
        result.reports.push_back(rhat_experiment(cfg, opt));
    }
    {
        CoverConfig cfg;
        if (!desk) {
            cfg.n_list = {8};
            cfg.replicas = 300;
            cfg.leading_order_n = -1;
        }
        result.reports.push_back(cover_experiment(cfg, opt));
    }
    {
        PhaseAbConfig cfg;
        if (!desk) {
            cfg.stability_ns = {8, 10};
            cfg.stability_replicas = 300;
            cfg.overdisp_n = 10;
            cfg.overdisp_r = 3;
            cfg.overdisp_replicas = 1000;
            cfg.planted_n = 9;
            cfg.planted_s = {0.0};
            cfg.planted_replicas = {4000};
            cfg.repulsion_ns = {};
            cfg.repulsion_replicas = 0;
        } else {
            cfg.stability_ns = {12, 16};
            cfg.stability_replicas = 2000;
            cfg.repulsion_ns = {10, 14, 18};
            cfg.repulsion_replicas = 400;
        }
        result.reports.push_back(phase_ab_experiment(cfg, opt));
    }

    for (const auto& r : result.reports) result.all_pass = result.all_pass && r.all_pass();
    return result;
}

}  // namespace treecover
