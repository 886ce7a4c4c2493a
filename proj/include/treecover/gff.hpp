#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treecover/rng.hpp"
#include "treecover/tree.hpp"

namespace treecover {

// A Gaussian field on the tree: zero at the root, i.i.d. N(0, 1/2) edge
// increments, stored per vertex in depth-major order. Edges are drawn in
// breadth-first order so a depth-K field is a prefix of a depth-(K+1) field
// generated from the same stream.
struct GaussianField {
    TreeShape shape;
    std::vector<double> values;

    double at(const VertexRef& v) const { return values[shape.id_of(v)]; }
    std::span<const double> level(int depth) const {
        return {values.data() + shape.level_offset(depth), shape.width(depth)};
    }
};

GaussianField sample_dgff(const TreeShape& shape, rng::Philox& gen);
GaussianField sample_dgff(const TreeShape& shape, std::uint64_t seed, std::uint64_t replica = 0);

enum class MartingaleVariant { Derivative, Exponential };

// The derivative martingale at depth n of the given field realization:
//   Regular:   2^{-2n}   * sum_{leaves} (sqrt(log 2) n - h) e^{2 sqrt(log 2) h}
//   UnaryRoot: 2^{-2n+1} * same sum over the 2^{n-1} leaves.
// The exponential variant drops the linear factor (and keeps the same
// normalization). Evaluation shifts by the leaf maximum before
// exponentiating, so deep trees do not overflow.
double derivative_martingale(const GaussianField& field, int n,
                             MartingaleVariant variant = MartingaleVariant::Derivative);

// Same quantity from one level of values, without materializing a field.
double derivative_martingale_level(std::span<const double> leaf_values, int n, TreeKind kind,
                                   MartingaleVariant variant = MartingaleVariant::Derivative);

struct MartingaleTerm {
    int depth = 0;
    double derivative = 0.0;
    double exponential = 0.0;
};

struct MartingaleSeries {
    TreeKind kind;
    std::vector<MartingaleTerm> terms;  // one per depth along a single realization
};

// Evaluates both martingale variants at every depth 1..max_depth along a
// single realization, streaming level by level.
MartingaleSeries sample_martingale_series(TreeKind kind, int max_depth, rng::Philox& gen);

// The pair of negatively correlated fields on two copies of the regular tree.
// Within each copy the law is the DGFF; across copies
//   Cov(h1(x), h2(y)) = -(1 - 2^{-(|x| ^ |y|)}) / 2.
// Construction: an i.i.d. family of sibling-antisymmetric edge fields, one
// per generation, turned into edge weights via scaled path sums on a host
// tree whose two root subtrees are identified with the copies.
struct NegCorrField {
    int n = 0;
    std::vector<double> h1, h2;        // per-vertex values, depth-major, copy-local shapes
    std::vector<double> omega1, omega2;  // edge weights indexed by the child vertex id
    // Path sums of the auxiliary antisymmetric fields on the host tree, one
    // vector per host generation g in [1, n+1] (index g-1, length 2^g).
    std::vector<std::vector<double>> sigma_paths;

    TreeShape copy_shape() const { return TreeShape{TreeKind::Regular, n}; }
    double copy_value(int copy, const VertexRef& v) const {
        return (copy == 1 ? h1 : h2)[copy_shape().id_of(v)];
    }
};

NegCorrField sample_negcorr(int n, rng::Philox& gen, bool keep_sigma = true);
NegCorrField sample_negcorr(int n, std::uint64_t seed, std::uint64_t replica = 0);

// Vertex in one of the two copies.
struct CopyVertex {
    int copy = 1;  // 1 or 2
    VertexRef v;
};

// Closed-form covariance of the two-copy field.
double negcorr_covariance_oracle(const CopyVertex& a, const CopyVertex& b);

// Closed-form covariance of the edge weights implied by the construction,
// computed by analytic accumulation over shared/sibling edges (no sampling).
// Edges are named by their child vertex within a copy.
double negcorr_edge_covariance(int copy_a, const VertexRef& child_a, int copy_b,
                               const VertexRef& child_b);

// Log-normal(-2 log 2, 2 log 2) multiplier.
double sample_lambda(rng::Philox& gen);

// Monte-Carlo average of exp(-C * Z * e^{-rate * s}) over the Z samples: the
// randomly shifted Gumbel law that appears in the cover-time limits.
double gumbel_mixture_cdf(double s, double rate, double C, std::span<const double> z_samples);

}  // namespace treecover
