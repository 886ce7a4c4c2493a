#include "doctest.h"
#include "treecover/tree.hpp"

using namespace treecover;

TEST_CASE("level widths and vertex counts") {
    CHECK(level_width(TreeKind::Regular, 0) == 1);
    CHECK(level_width(TreeKind::Regular, 3) == 8);
    CHECK(level_width(TreeKind::UnaryRoot, 0) == 1);
    CHECK(level_width(TreeKind::UnaryRoot, 1) == 1);
    CHECK(level_width(TreeKind::UnaryRoot, 5) == 16);

    const TreeShape reg = make_shape(TreeKind::Regular, 4);
    CHECK(reg.vertex_count() == 31);
    CHECK(reg.leaf_count() == 16);
    const TreeShape bar = make_shape(TreeKind::UnaryRoot, 4);
    CHECK(bar.vertex_count() == 16);
    CHECK(bar.leaf_count() == 8);
}

TEST_CASE("ancestor basics") {
    const VertexRef leaf = make_vertex(TreeKind::Regular, 5, 13);
    CHECK(ancestor(leaf, 5) == leaf);
    CHECK(ancestor(leaf, 0) == root_of(TreeKind::Regular));
    // index 6 = binary 110 at depth 3; depth-1 prefix is 1.
    CHECK(ancestor(make_vertex(TreeKind::Regular, 3, 6), 1) == make_vertex(TreeKind::Regular, 1, 1));
    CHECK_THROWS_AS(ancestor(leaf, 6), std::out_of_range);
    CHECK_THROWS_AS(ancestor(leaf, -1), std::out_of_range);
}

TEST_CASE("parent child inverse") {
    for (TreeKind kind : {TreeKind::Regular, TreeKind::UnaryRoot}) {
        const TreeShape shape = make_shape(kind, 5);
        for (int d = 0; d < 5; ++d) {
            for (std::uint64_t i = 0; i < shape.width(d); ++i) {
                const VertexRef v = shape.vertex(d, i);
                const int kids = (kind == TreeKind::UnaryRoot && d == 0) ? 1 : 2;
                for (int c = 0; c < kids; ++c) CHECK(parent(child(v, c)) == v);
            }
        }
    }
    CHECK_THROWS_AS(child(root_of(TreeKind::UnaryRoot), 1), std::out_of_range);
}

TEST_CASE("meet of pairs") {
    const VertexRef a = make_vertex(TreeKind::Regular, 2, 0);
    CHECK(meet(a, a) == a);
    CHECK(meet(a, make_vertex(TreeKind::Regular, 2, 1)) == make_vertex(TreeKind::Regular, 1, 0));
    CHECK(meet(a, make_vertex(TreeKind::Regular, 2, 3)) == root_of(TreeKind::Regular));
    CHECK_THROWS_AS(meet(a, make_vertex(TreeKind::UnaryRoot, 2, 1)), std::invalid_argument);

    // Unary root: distinct leaves always meet at depth >= 1.
    const TreeShape bar = make_shape(TreeKind::UnaryRoot, 6);
    for (std::uint64_t i = 0; i < bar.leaf_count(); ++i)
        for (std::uint64_t j = 0; j < bar.leaf_count(); ++j)
            CHECK(meet_depth(bar.leaf(i), bar.leaf(j)) >= 1);
}

TEST_CASE("meet consistency with ancestors and graph distance") {
    for (TreeKind kind : {TreeKind::Regular, TreeKind::UnaryRoot}) {
        const TreeShape shape = make_shape(kind, 6);
        for (std::uint64_t i = 0; i < shape.leaf_count(); ++i) {
            for (std::uint64_t j = 0; j < shape.leaf_count(); ++j) {
                const VertexRef x = shape.leaf(i);
                const VertexRef y = shape.leaf(j);
                const VertexRef m = meet(x, y);
                for (int k = 0; k <= m.depth; ++k) {
                    CHECK(ancestor(x, k) == ancestor(m, k));
                    CHECK(ancestor(x, k) == ancestor(y, k));
                }
                if (i != j) {
                    const int dist = (x.depth - m.depth) + (y.depth - m.depth);
                    CHECK(dist == 2 * (shape.n - m.depth));
                }
            }
        }
    }
}

TEST_CASE("subtree leaves") {
    const TreeShape reg = make_shape(TreeKind::Regular, 5);
    CHECK(subtree_leaves(root_of(TreeKind::Regular), 2, reg).size() == 4);
    const VertexRef y = reg.vertex(3, 5);
    CHECK(subtree_leaves(y, 0, reg) == std::vector<VertexRef>{y});
    const auto kids = subtree_leaves(reg.vertex(4, 7), 1, reg);
    REQUIRE(kids.size() == 2);
    CHECK(kids[0] == reg.vertex(5, 14));
    CHECK(kids[1] == reg.vertex(5, 15));

    // One-sided subtrees split evenly.
    const auto left = subtree_leaves(y, 2, reg, SubtreeSide::Left);
    const auto right = subtree_leaves(y, 2, reg, SubtreeSide::Right);
    CHECK(left.size() == 2);
    CHECK(right.size() == 2);
    CHECK(meet(left[0], left[1]).depth == 4);
    CHECK(meet(left[0], right[0]) == y);

    // Unary root has half as many leaves below it.
    const TreeShape bar = make_shape(TreeKind::UnaryRoot, 5);
    CHECK(subtree_leaves(root_of(TreeKind::UnaryRoot), 3, bar).size() == 4);
    CHECK_THROWS_AS(subtree_leaves(y, 3, reg), std::out_of_range);
}

TEST_CASE("subtree leaves partition the leaf level") {
    for (TreeKind kind : {TreeKind::Regular, TreeKind::UnaryRoot}) {
        const TreeShape shape = make_shape(kind, 6);
        for (int d = 1; d <= 5; ++d) {
            std::vector<bool> seen(shape.leaf_count(), false);
            for (std::uint64_t i = 0; i < shape.width(d); ++i) {
                for (const auto& leaf : subtree_leaves(shape.vertex(d, i), 6 - d, shape)) {
                    CHECK(!seen[leaf.index]);
                    seen[leaf.index] = true;
                }
            }
            for (bool b : seen) CHECK(b);
        }
    }
}

TEST_CASE("degree table") {
    const TreeShape reg = make_shape(TreeKind::Regular, 4);
    const TreeShape bar = make_shape(TreeKind::UnaryRoot, 4);
    CHECK(degree(root_of(TreeKind::Regular), reg) == 2);
    CHECK(degree(root_of(TreeKind::UnaryRoot), bar) == 1);
    CHECK(degree(reg.vertex(2, 1), reg) == 3);
    CHECK(degree(bar.vertex(2, 1), bar) == 3);
    CHECK(degree(reg.leaf(9), reg) == 1);
    CHECK(degree(bar.leaf(5), bar) == 1);
}
