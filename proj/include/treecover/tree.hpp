#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treecover {

// Two tree families: the regular rooted binary tree (root has two children)
// and the unary-root variant (root has a single child, every other internal
// vertex has two). Depths are capped at 30 so all widths fit in 64 bits.
enum class TreeKind { Regular, UnaryRoot };

inline constexpr int kMaxDepth = 30;

// Number of vertices at a given depth.
inline std::uint64_t level_width(TreeKind kind, int depth) {
    if (depth < 0 || depth > kMaxDepth) throw std::out_of_range("level_width: bad depth");
    if (kind == TreeKind::Regular) return std::uint64_t{1} << depth;
    return depth == 0 ? 1 : (std::uint64_t{1} << (depth - 1));
}

// A vertex addressed by (kind, depth, index). The index is the bit-path from
// the root; for the unary-root tree the first step is pinned, so depth-d
// vertices carry d-1 path bits.
struct VertexRef {
    TreeKind kind = TreeKind::Regular;
    int depth = 0;
    std::uint64_t index = 0;

    friend bool operator==(const VertexRef&, const VertexRef&) = default;
};

inline VertexRef make_vertex(TreeKind kind, int depth, std::uint64_t index) {
    if (depth < 0 || depth > kMaxDepth) throw std::out_of_range("vertex depth out of range");
    if (index >= level_width(kind, depth)) throw std::out_of_range("vertex index out of range");
    return VertexRef{kind, depth, index};
}

inline VertexRef root_of(TreeKind kind) { return VertexRef{kind, 0, 0}; }

// Number of path bits carried by the index at a given depth.
inline int path_bits(TreeKind kind, int depth) {
    return kind == TreeKind::Regular ? depth : (depth > 0 ? depth - 1 : 0);
}

inline VertexRef parent(const VertexRef& v) {
    if (v.depth == 0) throw std::out_of_range("root has no parent");
    if (v.depth == 1) return root_of(v.kind);
    return VertexRef{v.kind, v.depth - 1, v.index >> 1};
}

inline VertexRef child(const VertexRef& v, int which) {
    const int d = v.depth + 1;
    if (d > kMaxDepth) throw std::out_of_range("child depth out of range");
    if (v.kind == TreeKind::UnaryRoot && v.depth == 0) {
        if (which != 0) throw std::out_of_range("unary root has a single child");
        return VertexRef{v.kind, 1, 0};
    }
    if (which != 0 && which != 1) throw std::out_of_range("child selector must be 0 or 1");
    return VertexRef{v.kind, d, (v.index << 1) | static_cast<std::uint64_t>(which)};
}

// Ancestor of v at depth k (k = v.depth gives v itself, k = 0 the root).
inline VertexRef ancestor(const VertexRef& v, int k) {
    if (k < 0 || k > v.depth) throw std::out_of_range("ancestor: depth out of range");
    if (k == v.depth) return v;
    if (k == 0) return root_of(v.kind);
    const int drop = path_bits(v.kind, v.depth) - path_bits(v.kind, k);
    return VertexRef{v.kind, k, v.index >> drop};
}

// Deepest common ancestor.
inline VertexRef meet(const VertexRef& x, const VertexRef& y) {
    if (x.kind != y.kind) throw std::invalid_argument("meet: mismatched tree kinds");
    const int m = x.depth < y.depth ? x.depth : y.depth;
    const std::uint64_t a = ancestor(x, m).index;
    const std::uint64_t b = ancestor(y, m).index;
    if (a == b) return VertexRef{x.kind, m, a};
    const int diverge = std::bit_width(a ^ b);  // bits below the common prefix
    return ancestor(VertexRef{x.kind, m, a}, m - diverge);
}

inline int meet_depth(const VertexRef& x, const VertexRef& y) { return meet(x, y).depth; }

// A finite truncation of the tree at depth n.
struct TreeShape {
    TreeKind kind = TreeKind::Regular;
    int n = 1;

    std::uint64_t width(int depth) const { return level_width(kind, depth); }

    std::uint64_t vertex_count() const {
        if (kind == TreeKind::Regular) return (std::uint64_t{2} << n) - 1;  // 2^{n+1}-1
        return std::uint64_t{1} << n;                                       // 1 + (2^n - 1)
    }

    std::uint64_t leaf_count() const { return width(n); }

    // Flat id in depth-major order; used as the storage index everywhere.
    std::uint64_t level_offset(int depth) const {
        if (kind == TreeKind::Regular) return (std::uint64_t{1} << depth) - 1;
        return depth == 0 ? 0 : (std::uint64_t{1} << (depth - 1));
    }

    std::uint64_t id_of(const VertexRef& v) const { return level_offset(v.depth) + v.index; }

    VertexRef vertex(int depth, std::uint64_t index) const { return make_vertex(kind, depth, index); }

    VertexRef leaf(std::uint64_t index) const { return make_vertex(kind, n, index); }

    bool contains(const VertexRef& v) const {
        return v.kind == kind && v.depth <= n && v.index < width(v.depth);
    }
};

inline TreeShape make_shape(TreeKind kind, int n) {
    if (n < 1 || n > kMaxDepth) throw std::out_of_range("tree depth must be in [1, 30]");
    return TreeShape{kind, n};
}

inline int degree(const VertexRef& v, const TreeShape& shape) {
    if (!shape.contains(v)) throw std::out_of_range("degree: vertex outside shape");
    if (v.depth == shape.n) return 1;
    if (v.depth == 0) return shape.kind == TreeKind::Regular ? 2 : 1;
    return 3;
}

// Which descendants to enumerate: the two-sided subtree below y, or only the
// half hanging off its left/right child.
enum class SubtreeSide { Both, Left, Right };

// Descendants of y at distance r, i.e. the leaves of the depth-r subtree at y.
inline std::vector<VertexRef> subtree_leaves(const VertexRef& y, int r, const TreeShape& shape,
                                             SubtreeSide side = SubtreeSide::Both) {
    if (!shape.contains(y)) throw std::out_of_range("subtree_leaves: vertex outside shape");
    if (r < 0 || y.depth + r > shape.n) throw std::out_of_range("subtree_leaves: depth overflow");
    if (r == 0) {
        if (side != SubtreeSide::Both) throw std::invalid_argument("one-sided subtree needs r >= 1");
        return {y};
    }
    if (y.kind == TreeKind::UnaryRoot && y.depth == 0 && side != SubtreeSide::Both)
        throw std::invalid_argument("unary root has no left/right split");

    std::uint64_t base = y.index << (y.kind == TreeKind::UnaryRoot && y.depth == 0 ? r - 1 : r);
    std::uint64_t count = std::uint64_t{1} << (y.kind == TreeKind::UnaryRoot && y.depth == 0 ? r - 1 : r);
    if (side != SubtreeSide::Both) {
        count >>= 1;
        if (side == SubtreeSide::Right) base += count;
    }
    std::vector<VertexRef> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(VertexRef{y.kind, y.depth + r, base + i});
    return out;
}

inline std::string to_string(const VertexRef& v) {
    return std::string(v.kind == TreeKind::Regular ? "T" : "Tbar") + "(" +
           std::to_string(v.depth) + "," + std::to_string(v.index) + ")";
}

}  // namespace treecover
