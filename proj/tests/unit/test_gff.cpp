#include <cmath>
#include <vector>

#include "doctest.h"
#include "treecover/gff.hpp"
#include "treecover/numeric.hpp"
#include "treecover/stats.hpp"

using namespace treecover;

namespace {
const double kSqrtLog2 = std::sqrt(std::log(2.0));

double covariance_of(std::span<const double> a, std::span<const double> b) {
    return sample_covariance(a, b);
}
}  // namespace

TEST_CASE("dgff marginals and covariances") {
    const TreeShape shape = make_shape(TreeKind::Regular, 3);
    const int draws = 50000;
    std::vector<double> depth1(draws), sib_a(draws), sib_b(draws), far(draws);
    for (int r = 0; r < draws; ++r) {
        const GaussianField f = sample_dgff(shape, 404, r);
        CHECK(f.values[0] == 0.0);
        depth1[r] = f.at(shape.vertex(1, 0));
        sib_a[r] = f.at(shape.vertex(2, 0));
        sib_b[r] = f.at(shape.vertex(2, 1));
        far[r] = f.at(shape.vertex(2, 3));
    }
    CHECK(summarize(depth1).variance == doctest::Approx(0.5).epsilon(0.05));
    CHECK(summarize(sib_a).variance == doctest::Approx(1.0).epsilon(0.05));
    CHECK(covariance_of(sib_a, sib_b) == doctest::Approx(0.5).epsilon(0.10));
    CHECK(std::fabs(covariance_of(sib_a, far)) < 0.02);
}

TEST_CASE("prefix property: deeper fields extend shallower ones") {
    auto gen_a = rng::Philox(7, 7);
    auto gen_b = rng::Philox(7, 7);
    const GaussianField small = sample_dgff(make_shape(TreeKind::Regular, 4), gen_a);
    const GaussianField big = sample_dgff(make_shape(TreeKind::Regular, 5), gen_b);
    for (std::size_t i = 0; i < small.values.size(); ++i) CHECK(small.values[i] == big.values[i]);
}

TEST_CASE("gaussianity of a fixed linear functional") {
    // Moment z-tests on skewness and excess kurtosis of a fixed combination.
    const TreeShape shape = make_shape(TreeKind::UnaryRoot, 4);
    const int draws = 100000;
    std::vector<double> functional(draws);
    for (int r = 0; r < draws; ++r) {
        const GaussianField f = sample_dgff(shape, 991, r);
        functional[r] = 0.7 * f.at(shape.leaf(0)) - 1.3 * f.at(shape.leaf(5)) + f.at(shape.vertex(2, 1));
    }
    const Summary s = summarize(functional);
    double m3 = 0.0, m4 = 0.0;
    for (double x : functional) {
        const double d = x - s.mean;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m3 /= draws;
    m4 /= draws;
    const double sd3 = s.sd * s.sd * s.sd;
    const double skew_z = (m3 / sd3) / std::sqrt(6.0 / draws);
    const double kurt_z = (m4 / (s.variance * s.variance) - 3.0) / std::sqrt(24.0 / draws);
    CHECK(std::fabs(skew_z) < 4.0);
    CHECK(std::fabs(kurt_z) < 4.0);
}

TEST_CASE("derivative martingale on a forced flat field") {
    const int n = 5;
    GaussianField field;
    field.shape = make_shape(TreeKind::Regular, n);
    field.values.assign(field.shape.vertex_count(), 0.0);
    const double expected = std::ldexp(kSqrtLog2 * n, -n);  // 2^{-n} sqrt(log 2) n
    CHECK(derivative_martingale(field, n) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(derivative_martingale(field, n + 1), std::logic_error);
}

TEST_CASE("unary-root martingale carries the doubled normalization") {
    const int n = 4;
    GaussianField field;
    field.shape = make_shape(TreeKind::UnaryRoot, n);
    field.values.assign(field.shape.vertex_count(), 0.0);
    // 2^{-2n+1} * 2^{n-1} * sqrt(log 2) n = 2^{-n} sqrt(log 2) n.
    const double expected = std::ldexp(kSqrtLog2 * n, -n);
    CHECK(derivative_martingale(field, n) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("martingale evaluation is overflow-safe at depth 20") {
    auto gen = rng::Philox(3, 3);
    const MartingaleSeries series = sample_martingale_series(TreeKind::Regular, 20, gen);
    for (const auto& term : series.terms) {
        CHECK(std::isfinite(term.derivative));
        CHECK(std::isfinite(term.exponential));
        CHECK(term.exponential >= 0.0);
    }
}

TEST_CASE("negcorr analytic edge covariances at small depth") {
    const int n = 5;
    const TreeShape copy{TreeKind::Regular, n};
    double worst = 0.0;
    for (int da = 1; da <= n; ++da) {
        for (std::uint64_t ia = 0; ia < copy.width(da); ++ia) {
            for (int db = 1; db <= n; ++db) {
                for (std::uint64_t ib = 0; ib < copy.width(db); ++ib) {
                    const VertexRef a = copy.vertex(da, ia);
                    const VertexRef b = copy.vertex(db, ib);
                    const double same = negcorr_edge_covariance(1, a, 1, b);
                    const double cross = negcorr_edge_covariance(1, a, 2, b);
                    double want_same = (a == b) ? 0.5 : 0.0;
                    double want_cross = (da == db) ? -std::exp2(-(da + 1)) : 0.0;
                    worst = std::max(worst, std::fabs(same - want_same));
                    worst = std::max(worst, std::fabs(cross - want_cross));
                }
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("negcorr sampled covariances match the oracle") {
    const int n = 3;
    const int draws = 60000;
    const TreeShape copy{TreeKind::Regular, n};
    const VertexRef x2 = copy.vertex(2, 0);
    const VertexRef y3 = copy.vertex(3, 5);
    std::vector<double> h1x(draws), h2x(draws), h2y(draws), h1y(draws);
    for (int r = 0; r < draws; ++r) {
        const NegCorrField f = sample_negcorr(n, 515, r);
        h1x[r] = f.copy_value(1, x2);
        h2x[r] = f.copy_value(2, x2);
        h2y[r] = f.copy_value(2, y3);
        h1y[r] = f.copy_value(1, y3);
    }
    // Cross-copy: -(1 - 2^{-min depth})/2.
    CHECK(covariance_of(h1x, h2x) == doctest::Approx(-0.375).epsilon(0.08));
    CHECK(covariance_of(h1x, h2y) == doctest::Approx(-0.375).epsilon(0.08));
    CHECK(negcorr_covariance_oracle({1, x2}, {2, y3}) == doctest::Approx(-0.375));
    // Within copy: half the meet depth.
    CHECK(covariance_of(h1x, h1y) ==
          doctest::Approx(0.5 * meet_depth(x2, y3)).epsilon(0.10));
    // Marginal variance |x|/2.
    CHECK(summarize(h1x).variance == doctest::Approx(1.0).epsilon(0.05));
    CHECK(negcorr_covariance_oracle({1, x2}, {1, x2}) == doctest::Approx(1.0));
    // Deep cross pair approaches -1/2.
    const VertexRef deep = copy.vertex(3, 0);
    CHECK(negcorr_covariance_oracle({1, deep}, {2, deep}) ==
          doctest::Approx(-0.5 * (1.0 - std::exp2(-3))));
}

TEST_CASE("sigma path sums have the stated covariance structure") {
    // Empirical check of the antisymmetric-field path sums at one generation:
    // variance 2^{g-1}, zero across branches, -1 across the root split.
    const int n = 3;
    const int g = 3;  // host generation, leaves indexed by 3 bits
    const int draws = 60000;
    std::vector<double> same(draws), sib(draws), cross(draws);
    for (int r = 0; r < draws; ++r) {
        const NegCorrField f = sample_negcorr(n, 1999, r);
        const auto& paths = f.sigma_paths[g - 1];
        REQUIRE(paths.size() == 8);
        same[r] = paths[0];
        sib[r] = paths[2];    // meets index 0 at host depth 1
        cross[r] = paths[4];  // meets index 0 at the host root
    }
    CHECK(summarize(same).variance == doctest::Approx(std::ldexp(1.0, g - 1)).epsilon(0.05));
    CHECK(std::fabs(covariance_of(same, sib)) < 0.08);
    CHECK(covariance_of(same, cross) == doctest::Approx(-1.0).epsilon(0.10));
}

TEST_CASE("lambda moments") {
    const int draws = 100000;
    std::vector<double> xs(draws);
    auto gen = rng::Philox(88, 0);
    for (int r = 0; r < draws; ++r) {
        xs[r] = sample_lambda(gen);
        CHECK(xs[r] > 0.0);
    }
    CHECK(median(xs) == doctest::Approx(0.25).epsilon(0.03));
    CHECK(summarize(xs).mean == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("gumbel mixture cdf") {
    const std::vector<double> unit{1.0};
    CHECK(gumbel_mixture_cdf(0.0, 1.0, 1.0, unit) == doctest::Approx(std::exp(-1.0)));
    CHECK(gumbel_mixture_cdf(30.0, 1.0, 1.0, unit) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(gumbel_mixture_cdf(-20.0, 1.0, 1.0, unit) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK_THROWS_AS(gumbel_mixture_cdf(0.0, 1.0, 1.0, {}), std::invalid_argument);
    // Monotone and continuous in s on a grid, with sampled masses.
    std::vector<double> zs;
    auto gen = rng::Philox(3, 1);
    for (int i = 0; i < 200; ++i) zs.push_back(gen.exponential(1.0));
    double prev = 0.0;
    for (double s = -6.0; s <= 6.0; s += 0.25) {
        const double v = gumbel_mixture_cdf(s, 2.0 * kSqrtLog2, 1.0, zs);
        CHECK(v >= prev);
        prev = v;
    }
}
