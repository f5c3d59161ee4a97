#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include <evenfront/mesh.hpp>
#include <evenfront/problem.hpp>

using namespace evenfront;

namespace {

long long binomial(int n, int r) {
    long long c = 1;
    for (int j = 1; j <= r; ++j) c = c * (n - r + j) / j;
    return c;
}

}  // namespace

TEST_CASE("simplex lattice cardinalities") {
    CHECK(simplex_lattice(3, 14).size() == 120);  // C(16, 2)
    CHECK(simplex_lattice(4, 9).size() == 220);   // C(12, 3)
    for (int k = 2; k <= 5; ++k)
        for (int m = 1; m <= 20; ++m)
            CHECK(simplex_lattice(k, m).size() ==
                  static_cast<std::size_t>(binomial(m + k - 1, k - 1)));
}

TEST_CASE("simplex lattice for k=2, m=4 enumerates the five expected vectors") {
    const std::vector<Vec> lat = simplex_lattice(2, 4);
    REQUIRE(lat.size() == 5);
    CHECK(lat[0] == Vec{0.0, 1.0});
    CHECK(lat[1] == Vec{0.25, 0.75});
    CHECK(lat[2] == Vec{0.5, 0.5});
    CHECK(lat[3] == Vec{0.75, 0.25});
    CHECK(lat[4] == Vec{1.0, 0.0});
}

TEST_CASE("lattice weights are barycentric") {
    for (const Vec& w : simplex_lattice(4, 7)) {
        double s = 0.0;
        for (double c : w) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            s += c;
        }
        CHECK(s == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("invalid lattice parameters are rejected") {
    CHECK_THROWS_AS(simplex_lattice(1, 4), std::invalid_argument);
    CHECK_THROWS_AS(simplex_lattice(3, 0), std::invalid_argument);
}

TEST_CASE("adjacency pair counts follow the face dimension") {
    const AnsatzMesh mesh = build_adjacency(simplex_lattice(3, 14), 3, 14);
    int vertices = 0;
    for (const MeshNode& node : mesh.nodes) {
        int positive = 0;
        for (int i : node.index)
            if (i > 0) ++positive;
        if (positive == 1) {
            ++vertices;
            CHECK(node.is_vertex);
            CHECK(node.adjacency.empty());
        } else if (positive == 2) {
            // on a simplex edge: one balance constraint
            CHECK(node.adjacency.size() == 1);
        } else {
            // interior: one constraint per free axis
            CHECK(node.adjacency.size() == 2);
        }
        CHECK(node.adjacency.size() <= 2);  // k - 1
    }
    CHECK(vertices == 3);
    for (int a : mesh.anchors) CHECK(a >= 0);
}

TEST_CASE("adjacency references are valid and the node degree is bounded") {
    for (int k = 2; k <= 5; ++k) {
        const int m = 6;
        const AnsatzMesh mesh = build_adjacency(simplex_lattice(k, m), k, m);
        for (std::size_t p = 0; p < mesh.nodes.size(); ++p) {
            const MeshNode& node = mesh.nodes[p];
            std::set<int> neighbors;
            for (const AdjacencyPair& pair : node.adjacency) {
                CHECK(pair.left != pair.right);
                CHECK(pair.left != static_cast<int>(p));
                CHECK(pair.right != static_cast<int>(p));
                CHECK(pair.left >= 0);
                CHECK(pair.right >= 0);
                CHECK(pair.left < static_cast<int>(mesh.nodes.size()));
                CHECK(pair.right < static_cast<int>(mesh.nodes.size()));
                neighbors.insert(pair.left);
                neighbors.insert(pair.right);
            }
            CHECK(neighbors.size() <= static_cast<std::size_t>(2 * (k - 1)));
        }
    }
}

TEST_CASE("pair endpoints are one lattice step along the pair axis") {
    const AnsatzMesh mesh = build_adjacency(simplex_lattice(4, 5), 4, 5);
    for (const MeshNode& node : mesh.nodes) {
        for (const AdjacencyPair& pair : node.adjacency) {
            const auto& li = mesh.nodes[pair.left].index;
            const auto& ri = mesh.nodes[pair.right].index;
            CHECK(li[pair.axis] == node.index[pair.axis] - 1);
            CHECK(ri[pair.axis] == node.index[pair.axis] + 1);
            // left and right sit symmetrically about the node
            for (std::size_t c = 0; c < li.size(); ++c)
                CHECK(li[c] + ri[c] == 2 * node.index[c]);
        }
    }
}

TEST_CASE("k=2 chain: the middle node pairs its two neighbors") {
    const AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 4), 2, 4);
    REQUIRE(mesh.nodes.size() == 5);
    const MeshNode& mid = mesh.nodes[2];
    CHECK(mid.weights == Vec{0.5, 0.5});
    REQUIRE(mid.adjacency.size() == 1);
    CHECK(mesh.nodes[mid.adjacency[0].left].weights == Vec{0.25, 0.75});
    CHECK(mesh.nodes[mid.adjacency[0].right].weights == Vec{0.75, 0.25});
}

TEST_CASE("each node's adjacency is derivable from its multi-index alone") {
    // Independent reconstruction: for every node, recompute the expected
    // pairs from the index arithmetic and a standalone index->id map.
    const int k = 3, m = 7;
    const std::vector<Vec> lattice = simplex_lattice(k, m);
    const AnsatzMesh mesh = build_adjacency(lattice, k, m);
    std::map<std::vector<int>, int> id_of;
    for (std::size_t p = 0; p < mesh.nodes.size(); ++p) id_of[mesh.nodes[p].index] = (int)p;
    for (const MeshNode& node : mesh.nodes) {
        std::vector<int> support;
        for (int i = 0; i < k; ++i)
            if (node.index[i] > 0) support.push_back(i);
        if (support.size() < 2) continue;
        const int dep = support.back();
        REQUIRE(node.adjacency.size() == support.size() - 1);
        for (std::size_t t = 0; t + 1 < support.size(); ++t) {
            std::vector<int> idx = node.index;
            idx[support[t]] -= 1;
            idx[dep] += 1;
            CHECK(node.adjacency[t].axis == support[t]);
            CHECK(node.adjacency[t].left == id_of.at(idx));
            idx[support[t]] += 2;
            idx[dep] -= 2;
            CHECK(node.adjacency[t].right == id_of.at(idx));
        }
    }
}

TEST_CASE("initial positions interpolate the normalized anchors") {
    AnchorSet anchors;
    anchors.minimizers = {Vec{0.0}, Vec{1.0}, Vec{2.0}};
    anchors.anchor_objectives = {Vec{0.0, 1.0, 1.0}, Vec{1.0, 0.0, 1.0}, Vec{1.0, 1.0, 0.0}};
    anchors.utopia = Vec{0.0, 0.0, 0.0};
    anchors.nadir_estimate = Vec{1.0, 1.0, 1.0};

    AnsatzMesh mesh = build_adjacency(simplex_lattice(3, 3), 3, 3);
    initial_positions(mesh, anchors);

    for (const MeshNode& node : mesh.nodes) {
        if (node.is_vertex) {
            for (int i = 0; i < 3; ++i)
                if (node.weights[i] == 1.0)
                    CHECK(node.position == normalize(anchors.anchor_objectives[i], anchors));
        }
        // every coordinate is a convex combination of the anchor coordinates
        for (double c : node.position) {
            CHECK(c >= -1e-12);
            CHECK(c <= 1.0 + 1e-12);
        }
    }
    // centroid of unit-simplex anchors
    for (const MeshNode& node : mesh.nodes) {
        if (node.weights == Vec(3, 1.0 / 3.0)) {
            for (double c : node.position) CHECK(c == Catch::Approx(2.0 / 3.0).margin(1e-12));
        }
    }
}

TEST_CASE("k=2 midpoint interpolation") {
    AnchorSet anchors;
    anchors.minimizers = {Vec{0.0}, Vec{2.0}};
    anchors.anchor_objectives = {Vec{0.0, 1.0}, Vec{1.0, 0.0}};
    anchors.utopia = Vec{0.0, 0.0};
    anchors.nadir_estimate = Vec{1.0, 1.0};
    AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 4), 2, 4);
    initial_positions(mesh, anchors);
    CHECK(mesh.nodes[2].position[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(mesh.nodes[2].position[1] == Catch::Approx(0.5).margin(1e-12));
}
