#include <cmath>
#include <vector>

#include "doctest.h"
#include "treecover/numeric.hpp"
#include "treecover/rng.hpp"

using namespace treecover;

TEST_CASE("kahan handles adversarial cancellation") {
    KahanSum acc;
    acc.add(1e16);
    for (int i = 0; i < 10000; ++i) acc.add(1.0);
    acc.add(-1e16);
    CHECK(acc.value() == doctest::Approx(10000.0).epsilon(1e-12));
}

TEST_CASE("summary and quantiles") {
    std::vector<double> xs{4.0, 1.0, 3.0, 2.0, 5.0};
    const Summary s = summarize(xs);
    CHECK(s.mean == doctest::Approx(3.0));
    CHECK(s.variance == doctest::Approx(2.5));
    CHECK(median(xs) == doctest::Approx(3.0));
    CHECK(quantile(xs, 0.0) == 1.0);
    CHECK(quantile(xs, 1.0) == 5.0);
    CHECK(interquartile_range(xs) == doctest::Approx(2.0));
}

TEST_CASE("chi-square survival against known values") {
    CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
    // P(chi2_1 > 3.841) ~ 0.05, P(chi2_2 > x) = exp(-x/2).
    CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi2_sf(5.0, 2) == doctest::Approx(std::exp(-2.5)).epsilon(1e-8));
    CHECK(chi2_sf(30.0, 10) == doctest::Approx(0.000859).epsilon(0.01));
}

TEST_CASE("kolmogorov tail endpoints") {
    CHECK(kolmogorov_sf(0.01) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(kolmogorov_sf(1.36) == doctest::Approx(0.05).epsilon(0.02));
    CHECK(kolmogorov_sf(5.0) < 1e-10);
}

TEST_CASE("holm rejects only the clear failures") {
    const std::vector<double> ps{1e-9, 0.5, 0.04, 0.9};
    const auto rej = holm_reject(ps, 0.05);
    CHECK(rej[0]);
    CHECK(!rej[1]);
    CHECK(!rej[3]);
}

TEST_CASE("normal cdf symmetry") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.975).epsilon(0.001));
    CHECK(normal_cdf(-1.96) == doctest::Approx(0.025).epsilon(0.02));
    CHECK(z_two_sided_p(1.96) == doctest::Approx(0.05).epsilon(0.01));
}
