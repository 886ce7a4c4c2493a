#pragma once

#include <cstdint>
#include <vector>

#include "treecover/gff.hpp"
#include "treecover/walk.hpp"

namespace treecover {

struct ExperimentReport;  // stats.hpp

// One draw of the two sides of the local-time / Gaussian-field identity on
// the unary-root tree: an independent pair (L, h) and the combined field
// L + h^2, plus a fresh h' for the right-hand side (h' + sqrt(t))^2.
struct IsoSample {
    LocalTimeField L;
    GaussianField h;
    std::vector<double> lhs;  // per-vertex L(x) + h(x)^2
};

IsoSample iso_lhs_sample(int n, double t, std::uint64_t seed, std::uint64_t replica = 0);

// Per-leaf right-hand side (h'(x) + sqrt(t))^2 for an independent DGFF h'.
std::vector<double> iso_rhs_sample(int n, double t, std::uint64_t seed, std::uint64_t replica = 0);

struct IsoTestConfig {
    int samples = 100000;
    int projections = 8;       // fixed-seed random one-dimensional projections
    double alpha = 0.01;       // family level for the Holm-corrected verdict
    std::uint64_t seed = 1;
    int workers = 1;
};

// Distribution-level comparison of lhs and rhs leaf fields: per-leaf marginal
// KS, first/second joint moments (all leaf pairs), and KS on fixed random
// projections. The verdict applies a Holm correction across the p-valued
// tests.
ExperimentReport iso_distribution_test(int n, double t, const IsoTestConfig& config);

struct SubLevelSet {
    double u = 0.0;
    std::vector<std::uint64_t> members;  // leaf indices with statistic <= u
};

// Exact threshold filter over a per-leaf statistic.
SubLevelSet sublevel(std::span<const double> leaf_statistic, double u);

}  // namespace treecover
