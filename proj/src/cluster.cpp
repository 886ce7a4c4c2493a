#include "treecover/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace treecover {

namespace {
const double kSqrtLog2 = std::sqrt(std::log(2.0));

int window_min(int k, int n) { return std::min(k, n - k); }
}  // namespace

int r_n_of(int n, double eta) {
    if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("r_n_of: eta in (0, 1/2)");
    if (n < 1) throw std::invalid_argument("r_n_of: n >= 1");
    const int r = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.5 - eta)));
    return std::max(r, 1);
}

std::vector<VertexRef> ClusterDecomposition::window_members(int k_lo, int k_hi) const {
    std::vector<VertexRef> out;
    for (const auto& c : clusters)
        if (c.root_depth >= k_lo && c.root_depth <= k_hi)
            out.insert(out.end(), c.members.begin(), c.members.end());
    return out;
}

ClusterDecomposition decompose(std::span<const VertexRef> leaves, int n, int r_n) {
    ClusterDecomposition out;
    out.r_n = r_n;
    if (leaves.empty()) return out;
    std::map<std::uint64_t, Cluster> groups;
    for (const auto& leaf : leaves) {
        if (leaf.depth != n) throw std::invalid_argument("decompose: leaves must sit at depth n");
        const VertexRef anc = ancestor(leaf, r_n);
        auto [it, fresh] = groups.try_emplace(anc.index);
        if (fresh) it->second.ancestor_at_r = anc;
        it->second.members.push_back(leaf);
    }
    for (auto& [index, cluster] : groups) {
        VertexRef m = cluster.members.front();
        for (std::size_t i = 1; i < cluster.members.size(); ++i) m = meet(m, cluster.members[i]);
        cluster.root_depth = m.depth;
        out.clusters.push_back(std::move(cluster));
    }
    return out;
}

bool is_clustered(std::span<const VertexRef> leaves, int r, int R) {
    if (r > R) throw std::invalid_argument("is_clustered: r <= R");
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t j = i + 1; j < leaves.size(); ++j) {
            const int d = meet_depth(leaves[i], leaves[j]);
            if (d >= r && d < R) return false;
        }
    return true;
}

bool in_repulsion_band(double height, int n, int k, double eta, BandIndex index) {
    const double w = index == BandIndex::SymmetricMin ? static_cast<double>(window_min(k, n))
                                                      : static_cast<double>(n - k);
    const double dev = height - kSqrtLog2 * (n - k);
    return dev >= std::pow(w, 0.5 - eta) && dev <= std::pow(w, 0.5 + eta);
}

std::vector<VertexRef> sublevel_leaves(const LocalTimeField& field, double u) {
    std::vector<VertexRef> out;
    const TreeShape& shape = field.shape;
    const std::uint64_t off = shape.level_offset(shape.n);
    for (std::uint64_t i = 0; i < shape.leaf_count(); ++i)
        if (field.values[off + i] <= u) out.push_back(shape.leaf(i));
    return out;
}

namespace {

// Shared classifier core: `profile(id)` returns the trajectory height at a
// vertex (sqrt of local time, or the shifted Gaussian value).
template <typename Profile>
TrajectoryClass classify_core(const TreeShape& shape, Profile&& profile,
                              std::span<const VertexRef> low_leaves,
                              const TrajectoryParams& params) {
    const int n = shape.n;
    TrajectoryClass out;
    out.n = n;
    out.params = params;
    out.r_n = r_n_of(n, params.eta);
    out.r_prime = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), params.eta_prime)));
    out.degenerate_window = out.r_n >= n - out.r_n;
    out.decomposition = decompose(low_leaves, n, out.r_n);
    out.decomposition.u = params.u;
    if (out.degenerate_window) return out;

    const int k_lo = out.r_n;
    const int k_hi = n - out.r_n;

    for (const auto& cluster : out.decomposition.clusters) {
        const int kc = cluster.root_depth;
        const double band_kc = std::pow(static_cast<double>(window_min(kc, n)), 0.5 - params.eta);
        const bool big =
            static_cast<double>(cluster.members.size()) > std::exp(band_kc);
        for (const auto& leaf : cluster.members) {
            LeafClass rec;
            rec.leaf = leaf;
            rec.cluster_root_depth = kc;
            rec.cluster_size = cluster.members.size();
            rec.big_cluster = big;
            rec.insensitive = true;
            rec.soft_repelled = true;
            for (int k = k_lo; k <= k_hi; ++k) {
                const std::uint64_t id = shape.id_of(ancestor(leaf, k));
                const double height = profile(id);
                const double center = kSqrtLog2 * (n - k);
                if (!in_repulsion_band(height, n, k, params.eta, BandIndex::SymmetricMin))
                    rec.not_repelled = true;
                if (!in_repulsion_band(height, n, k, params.eta, BandIndex::LeafDistance))
                    rec.insensitive = false;
                if (height < center + out.r_prime) rec.soft_repelled = false;
                // Unusually low ancestor.
                const double wk = static_cast<double>(window_min(k, n));
                if (height <= center - std::pow(wk, 0.5 - params.eta_prime)) rec.d_rooted = true;
            }
            if (kc >= k_lo && kc <= k_hi) {
                const std::uint64_t id = shape.id_of(ancestor(leaf, kc));
                const double center = kSqrtLog2 * (n - kc);
                if (profile(id) > center + band_kc) rec.up_repelled = true;
            }
            out.leaves.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace

TrajectoryClass classify_trajectories(const LocalTimeField& field, const TrajectoryParams& params) {
    if (!field.track_internal)
        throw std::logic_error("classify_trajectories needs internal local times");
    const auto low = sublevel_leaves(field, params.u);
    return classify_core(
        field.shape, [&](std::uint64_t id) { return std::sqrt(field.values[id]); }, low, params);
}

TrajectoryClass classify_field_trajectories(const TreeShape& shape,
                                            std::span<const double> shifted_field,
                                            const TrajectoryParams& params) {
    if (shifted_field.size() != shape.vertex_count())
        throw std::invalid_argument("classify_field_trajectories: field size mismatch");
    std::vector<VertexRef> low;
    const std::uint64_t off = shape.level_offset(shape.n);
    for (std::uint64_t i = 0; i < shape.leaf_count(); ++i) {
        const double v = shifted_field[off + i];
        if (v * v <= params.u) low.push_back(shape.leaf(i));
    }
    return classify_core(
        shape, [&](std::uint64_t id) { return shifted_field[id]; }, low, params);
}

double cluster_count_statistic(const LocalTimeField& snapshot_a, int n, double eta) {
    const int r = r_n_of(n, eta);
    const auto zero = sublevel_leaves(snapshot_a, 0.0);
    std::vector<std::uint64_t> ancestors;
    ancestors.reserve(zero.size());
    for (const auto& leaf : zero) ancestors.push_back(ancestor(leaf, r).index);
    std::sort(ancestors.begin(), ancestors.end());
    const auto last = std::unique(ancestors.begin(), ancestors.end());
    return static_cast<double>(last - ancestors.begin()) / std::sqrt(static_cast<double>(n));
}

std::uint64_t phase_b_unvisited_clusters(const LocalTimeField& snapshot_a,
                                         std::span<const std::uint8_t> phase_b_visited, int n,
                                         double eta) {
    if (phase_b_visited.size() != snapshot_a.shape.leaf_count())
        throw std::invalid_argument("phase_b_unvisited_clusters: mark size mismatch");
    const int r = r_n_of(n, eta);
    const auto zero = sublevel_leaves(snapshot_a, 0.0);
    const auto dec = decompose(zero, n, r);
    std::vector<std::uint64_t> ancestors;
    for (const auto& cluster : dec.clusters) {
        if (cluster.root_depth < n - r) continue;  // only deep-rooted clusters survive phase A
        for (const auto& leaf : cluster.members) {
            if (!phase_b_visited[leaf.index]) {
                ancestors.push_back(cluster.ancestor_at_r.index);
                break;
            }
        }
    }
    std::sort(ancestors.begin(), ancestors.end());
    const auto last = std::unique(ancestors.begin(), ancestors.end());
    return static_cast<std::uint64_t>(last - ancestors.begin());
}

}  // namespace treecover
