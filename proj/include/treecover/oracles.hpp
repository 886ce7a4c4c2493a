#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>

#include "treecover/tree.hpp"

namespace treecover::oracles {

// Probability that the walk started at `start` hits `target` before `avoid`,
// from the discrete harmonic system (uniform neighbor averages) solved by a
// direct sparse factorization.
double hitting_probability(const TreeShape& shape, const VertexRef& start, const VertexRef& target,
                           const VertexRef& avoid);

// Closed-form finite-n moments of the leaf and running sums at root-clock t.
struct ExactMoments {
    double mean_S = 0.0;   // 2^n t
    double var_S = 0.0;    // exact pairwise-covariance sum
    double mean_R = 0.0;   // (2^{n+1} - 1) t
    double var_R = 0.0;    // the grouped sum with pair factor 2(2^{n-k}-1)^2 + 1_{k=n}
    double var_S_hat = 0.0;
    // Cov(L(x), L(y)) and the exact centered version Cov(L - S_hat, L - S_hat),
    // both as functions of the meet depth.
    std::map<int, double> cov_by_meet_depth;
    std::map<int, double> centered_cov_by_meet_depth;
};

ExactMoments exact_moments(int n, double t, TreeKind kind = TreeKind::Regular);

// Brute-force Var S by summing 2|x^y|t over all ordered leaf pairs.
double var_S_bruteforce(int n, double t, TreeKind kind = TreeKind::Regular);

// Exact joint non-visit probability for two depth-n leaves meeting at depth d
// at root-clock t: exp(-2t/(n+d)) when they share the depth-d ancestor
// (d >= 1), the product exp(-2t/n) when their excursions are disjoint (d=0).
double joint_nonvisit_probability(int n, int d, double t);

// Atom of the branch local time: P(L_t at depth k vanishes) = exp(-t/k).
double bessel_atom(double t, int k);

// Envelope shape of the branch-marginal density (absolute constant taken as
// one): s^{-1} sqrt(t/y) exp(-(sqrt t - sqrt y)^2 / s).
double bessel_density_bound(double t, double s, double y);

struct GirsanovConfig {
    double dt = 0.005;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
};

// Estimates E[phi(Y_0..Y_n); Y_n != 0] for the branch process by reweighted
// Brownian paths: Euler steps of variance 1/2, killed at zero, weighted by
// (sqrt(t)/B_n)^{1/2} exp(-(3/16) int B^{-2}).
double bessel_girsanov_estimate(double t, int n,
                                const std::function<double(std::span<const double>)>& functional,
                                const GirsanovConfig& config);

// First-moment bounds on the number of low leaves.
struct FirstMomentBound {
    double general = 0.0;      // exp(-t/n + 2tu/n^2 + n log 2 + 1)
    double specialized = 0.0;  // C_u e^{-sqrt(log 2) s} with C_u = e^{(2 log 2) u + 1}
    bool specialized_valid = false;  // requires n >= 4u and sqrt(t) >= sqrt(log 2) n
};

FirstMomentBound first_moment_bound(int n, double t, double u);

}  // namespace treecover::oracles
