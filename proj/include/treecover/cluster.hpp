#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treecover/tree.hpp"
#include "treecover/walk.hpp"

namespace treecover {

// Cluster scale: floor(n^{1/2-eta}), clamped to >= 1. eta in (0, 1/2).
int r_n_of(int n, double eta);

struct Cluster {
    VertexRef ancestor_at_r;  // shared ancestor at depth r_n
    int root_depth = 0;       // depth of the deepest common ancestor of the members
    std::vector<VertexRef> members;
};

struct ClusterDecomposition {
    double u = 0.0;
    int r_n = 1;
    std::vector<Cluster> clusters;

    std::size_t cluster_count() const { return clusters.size(); }
    // Members of clusters whose root depth lies in [k_lo, k_hi].
    std::vector<VertexRef> window_members(int k_lo, int k_hi) const;
};

// Groups depth-n leaves by their ancestor at depth r_n; the root depth of a
// cluster is the depth of the iterated meet of its members.
ClusterDecomposition decompose(std::span<const VertexRef> leaves, int n, int r_n);

// True iff every distinct pair meets at depth >= R or strictly below r.
bool is_clustered(std::span<const VertexRef> leaves, int r, int R);

struct TrajectoryParams {
    double eta = 0.25;        // band width exponent
    double eta_prime = 0.1;   // soft repulsion exponent (r'_n = ceil(n^{eta'}))
    double u = 0.0;           // sub-level threshold
};

// Which index drives the band width at depth k: the symmetric k ^ (n-k) or
// the distance to the leaves n-k. The two coincide for k >= n/2.
enum class BandIndex { SymmetricMin, LeafDistance };

// Closed centered band test for a trajectory height at depth k:
//   height - sqrt(log 2)(n-k) in [w^{1/2-eta}, w^{1/2+eta}],
// with w the chosen index.
bool in_repulsion_band(double height, int n, int k, double eta, BandIndex index);

// Per-leaf classification of a low-local-time leaf over the window
// K = [r_n, n - r_n]. Band membership uses closed intervals.
struct LeafClass {
    VertexRef leaf;
    int cluster_root_depth = 0;
    std::uint64_t cluster_size = 0;
    bool not_repelled = false;    // some k in K with sqrt L([x]_k) outside the centered band
    bool insensitive = false;     // every k in K inside the band indexed by n-k
    bool up_repelled = false;     // sqrt L at the cluster root depth above the band top
    bool big_cluster = false;     // cluster size exceeds e^{(k ^ (n-k))^{1/2-eta}}
    bool d_rooted = false;        // some ancestor in the unusually-low set
    bool soft_repelled = false;   // every k in K with sqrt L([x]_k) >= sqrt(log 2)(n-k) + r'_n
};

struct TrajectoryClass {
    int n = 0;
    int r_n = 1;
    int r_prime = 1;
    bool degenerate_window = false;  // r_n >= n - r_n at desk scale
    TrajectoryParams params;
    ClusterDecomposition decomposition;  // of the sub-level set at u
    std::vector<LeafClass> leaves;
};

// Evaluates the trajectory classifiers over a fully tracked local-time field:
// the sub-level set at u, its clusters, and per-leaf band/repulsion flags.
TrajectoryClass classify_trajectories(const LocalTimeField& field, const TrajectoryParams& params);

// Same classifiers driven by a per-vertex Gaussian profile (the shifted field
// h' + m_n), for the field-side analogs of the band sets.
TrajectoryClass classify_field_trajectories(const TreeShape& shape,
                                            std::span<const double> shifted_field,
                                            const TrajectoryParams& params);

// |[{leaves with zero local time}]_{r_n}| / sqrt(n) for a phase-A snapshot.
double cluster_count_statistic(const LocalTimeField& snapshot_a, int n, double eta);

// Number of r_n-ancestors of leaves that were unvisited in phase B and belong
// to deep-rooted (root depth >= n - r_n) clusters of the phase-A zero set.
std::uint64_t phase_b_unvisited_clusters(const LocalTimeField& snapshot_a,
                                         std::span<const std::uint8_t> phase_b_visited, int n,
                                         double eta);

// Leaves of the field's tree whose local time is <= u.
std::vector<VertexRef> sublevel_leaves(const LocalTimeField& field, double u);

}  // namespace treecover
