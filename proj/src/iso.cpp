#include "treecover/iso.hpp"

#include <cmath>

#include "treecover/parallel.hpp"
#include "treecover/stats.hpp"

namespace treecover {

IsoSample iso_lhs_sample(int n, double t, std::uint64_t seed, std::uint64_t replica) {
    if (t < 0.0) throw std::invalid_argument("iso_lhs_sample: t >= 0");
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    IsoSample sample;
    WalkConfig config{shape, true, seed, replica};
    sample.L = simulate(config, StopRule::root_local_time(t)).field;
    auto gen = rng::Philox(seed, rng::stream_id(0x69736f68ull, replica, rng::Lane::FieldA));
    sample.h = sample_dgff(shape, gen);
    sample.lhs.resize(shape.vertex_count());
    for (std::uint64_t id = 0; id < sample.lhs.size(); ++id) {
        const double h = sample.h.values[id];
        sample.lhs[id] = sample.L.values[id] + h * h;
    }
    return sample;
}

std::vector<double> iso_rhs_sample(int n, double t, std::uint64_t seed, std::uint64_t replica) {
    if (t < 0.0) throw std::invalid_argument("iso_rhs_sample: t >= 0");
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    auto gen = rng::Philox(seed, rng::stream_id(0x69736f70ull, replica, rng::Lane::FieldB));
    const GaussianField hp = sample_dgff(shape, gen);
    const double sqrt_t = std::sqrt(t);
    const std::uint64_t off = shape.level_offset(n);
    const std::uint64_t leaves = shape.leaf_count();
    std::vector<double> rhs(leaves);
    for (std::uint64_t i = 0; i < leaves; ++i) {
        const double v = hp.values[off + i] + sqrt_t;
        rhs[i] = v * v;
    }
    return rhs;
}

SubLevelSet sublevel(std::span<const double> leaf_statistic, double u) {
    if (u < 0.0) throw std::invalid_argument("sublevel: u >= 0");
    SubLevelSet out;
    out.u = u;
    for (std::uint64_t i = 0; i < leaf_statistic.size(); ++i)
        if (leaf_statistic[i] <= u) out.members.push_back(i);
    return out;
}

ExperimentReport iso_distribution_test(int n, double t, const IsoTestConfig& config) {
    if (config.samples < 100) throw std::invalid_argument("iso_distribution_test: too few samples");
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, n);
    const std::uint64_t leaves = shape.leaf_count();
    const std::size_t samples = static_cast<std::size_t>(config.samples);
    const std::uint64_t off = shape.level_offset(n);

    // Column-major matrices: per leaf, one vector of samples.
    std::vector<std::vector<double>> lhs(leaves), rhs(leaves);
    for (auto& col : lhs) col.resize(samples);
    for (auto& col : rhs) col.resize(samples);

    parallel_for(samples, config.workers, [&](std::size_t r) {
        const IsoSample ls = iso_lhs_sample(n, t, config.seed, r);
        const auto rs = iso_rhs_sample(n, t, config.seed, r);
        for (std::uint64_t x = 0; x < leaves; ++x) {
            lhs[x][r] = ls.lhs[off + x];
            rhs[x][r] = rs[x];
        }
    });

    ExperimentReport report;
    report.name = "iso-test";
    report.master_seed = config.seed;
    report.add_param("n", n);
    report.add_param("t", t);
    report.add_param("samples", static_cast<std::uint64_t>(samples));
    report.add_param("projections", config.projections);
    report.holm_alpha = config.alpha;

    // Per-leaf marginal KS.
    for (std::uint64_t x = 0; x < leaves; ++x) {
        const KsResult ks = ks_two_sample(lhs[x], rhs[x]);
        TestRecord rec;
        rec.name = "marginal_ks_leaf" + std::to_string(x);
        rec.statistic = ks.statistic;
        rec.p = ks.p;
        rec.pass = ks.p > config.alpha;
        report.tests.push_back(rec);
    }

    // First and second joint moments, z-tested between the two ensembles.
    auto moment_z = [&](const std::vector<double>& a, const std::vector<double>& b) {
        const Summary sa = summarize(a);
        const Summary sb = summarize(b);
        const double se = std::sqrt(sa.variance / sa.n + sb.variance / sb.n);
        return se > 0.0 ? (sa.mean - sb.mean) / se : 0.0;
    };
    std::vector<double> prod_a(samples), prod_b(samples);
    for (std::uint64_t x = 0; x < leaves; ++x) {
        {
            const double z = moment_z(lhs[x], rhs[x]);
            TestRecord rec;
            rec.name = "mean_leaf" + std::to_string(x);
            rec.statistic = z;
            rec.pass = std::fabs(z) <= 3.0;
            report.tests.push_back(rec);
        }
        for (std::uint64_t y = x; y < leaves; ++y) {
            for (std::size_t r = 0; r < samples; ++r) {
                prod_a[r] = lhs[x][r] * lhs[y][r];
                prod_b[r] = rhs[x][r] * rhs[y][r];
            }
            const double z = moment_z(prod_a, prod_b);
            TestRecord rec;
            rec.name = "second_moment_" + std::to_string(x) + "_" + std::to_string(y);
            rec.statistic = z;
            rec.pass = std::fabs(z) <= 3.0;
            report.tests.push_back(rec);
        }
    }

    // Fixed-seed random one-dimensional projections, KS-compared.
    rng::Philox proj_gen(config.seed, rng::stream_id(0x70726f6aull, 0, rng::Lane::Projection));
    std::vector<double> pa(samples), pb(samples), w(leaves);
    for (int p = 0; p < config.projections; ++p) {
        double norm = 0.0;
        for (auto& wi : w) {
            wi = proj_gen.normal();
            norm += wi * wi;
        }
        norm = std::sqrt(norm);
        for (auto& wi : w) wi /= norm;
        for (std::size_t r = 0; r < samples; ++r) {
            double sa = 0.0, sb = 0.0;
            for (std::uint64_t x = 0; x < leaves; ++x) {
                sa += w[x] * lhs[x][r];
                sb += w[x] * rhs[x][r];
            }
            pa[r] = sa;
            pb[r] = sb;
        }
        const KsResult ks = ks_two_sample(pa, pb);
        TestRecord rec;
        rec.name = "projection_ks_" + std::to_string(p);
        rec.statistic = ks.statistic;
        rec.p = ks.p;
        rec.pass = ks.p > config.alpha;
        report.tests.push_back(rec);
    }

    report.apply_holm();
    return report;
}

}  // namespace treecover
