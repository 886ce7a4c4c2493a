#include "treecover/oracles.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "treecover/numeric.hpp"
#include "treecover/parallel.hpp"
#include "treecover/rng.hpp"

namespace treecover::oracles {

double hitting_probability(const TreeShape& shape, const VertexRef& start, const VertexRef& target,
                           const VertexRef& avoid) {
    if (shape.n > 14) throw std::invalid_argument("hitting_probability: n <= 14");
    if (target == avoid) throw std::invalid_argument("hitting_probability: target == avoid");
    if (start == target) return 1.0;
    if (start == avoid) return 0.0;

    const std::uint64_t count = shape.vertex_count();
    const std::uint64_t target_id = shape.id_of(target);
    const std::uint64_t avoid_id = shape.id_of(avoid);

    // Unknowns: all vertices except the two boundary ones.
    std::vector<std::int64_t> unknown_index(count, -1);
    std::int64_t m = 0;
    for (std::uint64_t id = 0; id < count; ++id)
        if (id != target_id && id != avoid_id) unknown_index[id] = m++;

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);

    for (int d = 0; d <= shape.n; ++d) {
        const std::uint64_t w = shape.width(d);
        for (std::uint64_t i = 0; i < w; ++i) {
            const VertexRef v = shape.vertex(d, i);
            const std::uint64_t id = shape.id_of(v);
            if (unknown_index[id] < 0) continue;
            const int row = static_cast<int>(unknown_index[id]);
            const int deg = degree(v, shape);
            triplets.emplace_back(row, row, 1.0);
            const double weight = 1.0 / static_cast<double>(deg);
            auto couple = [&](const VertexRef& nb) {
                const std::uint64_t nid = shape.id_of(nb);
                if (nid == target_id) {
                    rhs[row] += weight;
                } else if (nid != avoid_id) {
                    triplets.emplace_back(row, static_cast<int>(unknown_index[nid]), -weight);
                }
            };
            if (d > 0) couple(parent(v));
            if (d < shape.n) {
                couple(child(v, 0));
                if (!(shape.kind == TreeKind::UnaryRoot && d == 0)) couple(child(v, 1));
            }
        }
    }

    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success) throw std::runtime_error("hitting_probability: singular system");
    Eigen::VectorXd h = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("hitting_probability: solve failed");
    const double residual = (A * h - rhs).norm();
    if (residual > 1e-10 * (1.0 + rhs.norm()))
        throw std::runtime_error("hitting_probability: residual too large");
    return h[unknown_index[shape.id_of(start)]];
}

namespace {

// Ordered leaf pairs of the depth-n tree whose meet sits exactly at depth k.
double leaf_pair_count(int n, int k, TreeKind kind) {
    const double width_k = static_cast<double>(level_width(kind, k));
    if (k == n) return width_k;
    const int children = (k == 0 && kind == TreeKind::UnaryRoot) ? 1 : 2;
    if (children < 2) return 0.0;
    // Two distinct child subtrees, each holding 2^{n-k-1} leaves.
    return width_k * 2.0 * std::ldexp(1.0, 2 * (n - k - 1));
}

}  // namespace

ExactMoments exact_moments(int n, double t, TreeKind kind) {
    if (n < 1 || n > kMaxDepth) throw std::invalid_argument("exact_moments: bad depth");
    ExactMoments m;
    const double leaves = static_cast<double>(level_width(kind, n));
    m.mean_S = leaves * t;
    double vertices = 0.0;
    for (int d = 0; d <= n; ++d) vertices += static_cast<double>(level_width(kind, d));
    m.mean_R = vertices * t;

    KahanSum var_s;
    for (int k = 0; k <= n; ++k) var_s.add(leaf_pair_count(n, k, kind) * 2.0 * t * k);
    m.var_S = var_s.value();
    m.var_S_hat = m.var_S / (leaves * leaves);

    // Grouped sum with the pair factor 2(2^{n-k}-1)^2 + 1_{k=n}; reproduces the
    // asymptotic variance of the running time (the factor is not an exact
    // finite-n pair count).
    KahanSum var_r;
    for (int k = 0; k <= n; ++k) {
        const double fac = 2.0 * std::pow(std::ldexp(1.0, n - k) - 1.0, 2) + (k == n ? 1.0 : 0.0);
        var_r.add(static_cast<double>(level_width(kind, k)) * fac * 2.0 * t * k);
    }
    m.var_R = var_r.value();

    for (int d = 0; d <= n; ++d) {
        m.cov_by_meet_depth[d] = 2.0 * d * t;
        m.centered_cov_by_meet_depth[d] = 2.0 * d * t - m.var_S_hat;
    }
    return m;
}

double var_S_bruteforce(int n, double t, TreeKind kind) {
    if (n > 8) throw std::invalid_argument("var_S_bruteforce: n <= 8");
    const TreeShape shape{kind, n};
    const std::uint64_t leaves = shape.leaf_count();
    KahanSum acc;
    for (std::uint64_t i = 0; i < leaves; ++i)
        for (std::uint64_t j = 0; j < leaves; ++j)
            acc.add(2.0 * t * meet_depth(shape.leaf(i), shape.leaf(j)));
    return acc.value();
}

double joint_nonvisit_probability(int n, int d, double t) {
    if (d < 0 || d >= n) throw std::invalid_argument("joint_nonvisit_probability: 0 <= d < n");
    if (d == 0) return std::exp(-2.0 * t / n);
    return std::exp(-2.0 * t / (n + d));
}

double bessel_atom(double t, int k) {
    if (t < 0.0 || k < 1) throw std::invalid_argument("bessel_atom: t >= 0, k >= 1");
    return std::exp(-t / static_cast<double>(k));
}

double bessel_density_bound(double t, double s, double y) {
    if (!(y > 0.0)) throw std::domain_error("bessel_density_bound: y > 0");
    if (!(s > 0.0)) throw std::domain_error("bessel_density_bound: s > 0");
    const double diff = std::sqrt(t) - std::sqrt(y);
    return (1.0 / s) * std::sqrt(t / y) * std::exp(-diff * diff / s);
}

double bessel_girsanov_estimate(double t, int n,
                                const std::function<double(std::span<const double>)>& functional,
                                const GirsanovConfig& config) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("bessel_girsanov_estimate: dt > 0");
    const std::uint64_t steps_per_unit = static_cast<std::uint64_t>(std::llround(1.0 / config.dt));
    if (steps_per_unit < 1) throw std::invalid_argument("bessel_girsanov_estimate: dt too large");
    const double dt = 1.0 / static_cast<double>(steps_per_unit);
    const double step_sd = std::sqrt(0.5 * dt);
    const double sqrt_t = std::sqrt(t);

    const int workers = std::max(config.workers, 1);
    std::vector<double> partial(config.paths, 0.0);
    parallel_for(config.paths, workers, [&](std::size_t p) {
        rng::Philox gen(config.seed, rng::stream_id(0x67697273ull, p, rng::Lane::Walk));
        std::vector<double> squared(n + 1);
        double b = sqrt_t;
        squared[0] = b * b;
        double integral = 0.0;  // trapezoidal in 1/B^2
        bool killed = false;
        for (int unit = 0; unit < n && !killed; ++unit) {
            for (std::uint64_t s = 0; s < steps_per_unit; ++s) {
                const double prev_inv = 1.0 / (b * b);
                b += step_sd * gen.normal();
                if (b <= 0.0) {
                    killed = true;
                    break;
                }
                integral += 0.5 * dt * (prev_inv + 1.0 / (b * b));
            }
            if (!killed) squared[unit + 1] = b * b;
        }
        if (killed) return;  // contributes zero
        const double weight = std::sqrt(sqrt_t / b) * std::exp(-(3.0 / 16.0) * integral);
        partial[p] = functional(squared) * weight;
    });
    KahanSum acc;
    for (double v : partial) acc.add(v);
    return acc.value() / static_cast<double>(config.paths);
}

FirstMomentBound first_moment_bound(int n, double t, double u) {
    if (n < 1 || t < 0.0 || u < 0.0) throw std::invalid_argument("first_moment_bound: bad input");
    const double log2 = std::log(2.0);
    FirstMomentBound out;
    out.general = std::exp(-t / n + 2.0 * t * u / (static_cast<double>(n) * n) + n * log2 + 1.0);
    const double s = std::sqrt(t) - std::sqrt(log2) * n;
    out.specialized_valid = n >= 4.0 * u && s >= 0.0;
    out.specialized = std::exp(2.0 * log2 * u + 1.0) * std::exp(-std::sqrt(log2) * s);
    return out;
}

}  // namespace treecover::oracles
