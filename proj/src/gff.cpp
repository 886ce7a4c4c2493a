#include "treecover/gff.hpp"

#include <cmath>
#include <stdexcept>

#include "treecover/numeric.hpp"

namespace treecover {

namespace {
const double kSqrtLog2 = std::sqrt(std::log(2.0));
const double kEdgeSd = std::sqrt(0.5);
}  // namespace

GaussianField sample_dgff(const TreeShape& shape, rng::Philox& gen) {
    GaussianField field;
    field.shape = shape;
    field.values.assign(shape.vertex_count(), 0.0);
    for (int d = 1; d <= shape.n; ++d) {
        const std::uint64_t off = shape.level_offset(d);
        const std::uint64_t w = shape.width(d);
        const std::uint64_t poff = shape.level_offset(d - 1);
        for (std::uint64_t i = 0; i < w; ++i) {
            const std::uint64_t parent_index = (d == 1) ? 0 : (i >> 1);
            field.values[off + i] = field.values[poff + parent_index] + kEdgeSd * gen.normal();
        }
    }
    return field;
}

GaussianField sample_dgff(const TreeShape& shape, std::uint64_t seed, std::uint64_t replica) {
    auto gen = rng::Philox(seed, rng::stream_id(0x64676666ull, replica, rng::Lane::FieldA));
    return sample_dgff(shape, gen);
}

double derivative_martingale_level(std::span<const double> leaf_values, int n, TreeKind kind,
                                   MartingaleVariant variant) {
    if (leaf_values.empty()) throw std::invalid_argument("empty leaf level");
    double max_h = leaf_values[0];
    for (double h : leaf_values) max_h = std::max(max_h, h);
    KahanSum acc;
    const double beta = 2.0 * kSqrtLog2;
    for (double h : leaf_values) {
        const double weight = std::exp(beta * (h - max_h));
        acc.add(variant == MartingaleVariant::Derivative ? (kSqrtLog2 * n - h) * weight : weight);
    }
    // 2^{-2n} (Regular) or 2^{-2n+1} (UnaryRoot) times e^{beta max_h}, applied
    // in log scale so deep trees stay finite.
    const double log2 = std::log(2.0);
    const double log_scale =
        beta * max_h - 2.0 * n * log2 + (kind == TreeKind::UnaryRoot ? log2 : 0.0);
    return acc.value() * std::exp(log_scale);
}

double derivative_martingale(const GaussianField& field, int n, MartingaleVariant variant) {
    if (n < 1 || n > field.shape.n) throw std::logic_error("martingale depth exceeds sampled field");
    return derivative_martingale_level(
        {field.values.data() + field.shape.level_offset(n), field.shape.width(n)}, n,
        field.shape.kind, variant);
}

MartingaleSeries sample_martingale_series(TreeKind kind, int max_depth, rng::Philox& gen) {
    if (max_depth < 1 || max_depth > kMaxDepth) throw std::out_of_range("bad martingale depth");
    MartingaleSeries series;
    series.kind = kind;
    std::vector<double> level{0.0};  // root
    std::vector<double> next;
    for (int d = 1; d <= max_depth; ++d) {
        const std::uint64_t w = level_width(kind, d);
        next.resize(w);
        for (std::uint64_t i = 0; i < w; ++i) {
            const std::uint64_t parent_index = (d == 1) ? 0 : (i >> 1);
            next[i] = level[parent_index] + kEdgeSd * gen.normal();
        }
        level.swap(next);
        MartingaleTerm term;
        term.depth = d;
        term.derivative = derivative_martingale_level(level, d, kind, MartingaleVariant::Derivative);
        term.exponential = derivative_martingale_level(level, d, kind, MartingaleVariant::Exponential);
        series.terms.push_back(term);
    }
    return series;
}

NegCorrField sample_negcorr(int n, rng::Philox& gen, bool keep_sigma) {
    if (n < 1 || n + 1 > kMaxDepth) throw std::out_of_range("negcorr depth out of range");
    NegCorrField out;
    out.n = n;
    const TreeShape copy{TreeKind::Regular, n};
    const int host_depth = n + 1;

    // One antisymmetric field per host generation g >= 2; its path sums to
    // host depth g produce the edge weights of copy generation g-1. Each
    // field assigns generation-k sibling edges opposite values of variance
    // 2^{(k-2) v 0}.
    out.omega1.assign(copy.vertex_count(), 0.0);
    out.omega2.assign(copy.vertex_count(), 0.0);
    if (keep_sigma) out.sigma_paths.resize(host_depth);

    std::vector<double> path_current, path_next;
    for (int g = 2; g <= host_depth; ++g) {
        // Build path sums of a fresh sigma field down to host depth g.
        path_current.assign(1, 0.0);
        for (int k = 1; k <= g; ++k) {
            const std::uint64_t parents = std::uint64_t{1} << (k - 1);
            path_next.resize(parents * 2);
            const double sd = std::sqrt(std::ldexp(1.0, std::max(k - 2, 0)));
            for (std::uint64_t p = 0; p < parents; ++p) {
                const double e = sd * gen.normal();
                path_next[2 * p] = path_current[p] + e;
                path_next[2 * p + 1] = path_current[p] - e;
            }
            path_current.swap(path_next);
        }
        // Copy-generation m = g-1 edge to copy vertex (m, j) corresponds to the
        // host leaf (g, copy_bit * 2^m + j).
        const int m = g - 1;
        const double scale = std::exp2(-0.5 * g);
        const std::uint64_t half = std::uint64_t{1} << m;
        const std::uint64_t off = copy.level_offset(m);
        for (std::uint64_t j = 0; j < half; ++j) {
            out.omega1[off + j] = scale * path_current[j];
            out.omega2[off + j] = scale * path_current[half + j];
        }
        if (keep_sigma) out.sigma_paths[g - 1] = path_current;
    }

    // Path sums of omega within each copy.
    auto accumulate = [&copy, n](const std::vector<double>& omega) {
        std::vector<double> h(copy.vertex_count(), 0.0);
        for (int d = 1; d <= n; ++d) {
            const std::uint64_t off = copy.level_offset(d);
            const std::uint64_t poff = copy.level_offset(d - 1);
            const std::uint64_t w = copy.width(d);
            for (std::uint64_t i = 0; i < w; ++i)
                h[off + i] = h[poff + (d == 1 ? 0 : (i >> 1))] + omega[off + i];
        }
        return h;
    };
    out.h1 = accumulate(out.omega1);
    out.h2 = accumulate(out.omega2);
    return out;
}

NegCorrField sample_negcorr(int n, std::uint64_t seed, std::uint64_t replica) {
    auto gen = rng::Philox(seed, rng::stream_id(0x6e656763ull, replica, rng::Lane::FieldA));
    return sample_negcorr(n, gen);
}

double negcorr_covariance_oracle(const CopyVertex& a, const CopyVertex& b) {
    if (a.v.kind != TreeKind::Regular || b.v.kind != TreeKind::Regular)
        throw std::invalid_argument("negcorr copies live on the regular tree");
    if (a.copy == b.copy) return 0.5 * meet_depth(a.v, b.v);
    const int m = std::min(a.v.depth, b.v.depth);
    return -0.5 * (1.0 - std::exp2(-m));
}

double negcorr_edge_covariance(int copy_a, const VertexRef& child_a, int copy_b,
                               const VertexRef& child_b) {
    if (child_a.depth < 1 || child_b.depth < 1)
        throw std::invalid_argument("edges are named by child vertices of depth >= 1");
    if (child_a.depth != child_b.depth) return 0.0;  // distinct generations use independent fields
    const int m = child_a.depth;  // copy generation; host generation g = m + 1
    const int g = m + 1;
    // Host leaves reached by the two edges.
    const std::uint64_t xa = (static_cast<std::uint64_t>(copy_a - 1) << m) | child_a.index;
    const std::uint64_t xb = (static_cast<std::uint64_t>(copy_b - 1) << m) | child_b.index;
    // Covariance of the two host path sums: shared edges add their variance;
    // the first divergent generation contributes the sibling anticorrelation.
    int shared = g;
    if (xa != xb) {
        const int diverge_bits = std::bit_width(xa ^ xb);
        shared = g - diverge_bits;
    }
    auto edge_var = [](int k) { return std::ldexp(1.0, std::max(k - 2, 0)); };
    double cov = 0.0;
    for (int k = 1; k <= shared; ++k) cov += edge_var(k);
    if (shared < g) cov -= edge_var(shared + 1);
    return std::exp2(-g) * cov;
}

double sample_lambda(rng::Philox& gen) {
    const double mu = -2.0 * std::log(2.0);
    const double sigma = std::sqrt(2.0 * std::log(2.0));
    return std::exp(mu + sigma * gen.normal());
}

double gumbel_mixture_cdf(double s, double rate, double C, std::span<const double> z_samples) {
    if (z_samples.empty()) throw std::invalid_argument("gumbel_mixture_cdf: empty sample list");
    if (!(C > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gumbel_mixture_cdf: C, rate > 0");
    const double damp = std::exp(-rate * s);
    KahanSum acc;
    for (double z : z_samples) acc.add(std::exp(-C * z * damp));
    return acc.value() / static_cast<double>(z_samples.size());
}

}  // namespace treecover
