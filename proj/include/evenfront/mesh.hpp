#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "problem.hpp"

namespace evenfront {

/// One equispacing relation of a node: the opposing neighbors (node ids)
/// along one barycentric lattice axis.
struct AdjacencyPair {
    int axis = 0;
    int left = -1;
    int right = -1;
};

struct MeshNode {
    std::vector<int> index;  // lattice multi-index, length k, sums to m
    Vec weights;             // barycentric coordinates, length k
    Vec position;            // current normalized objective-space estimate
    std::vector<AdjacencyPair> adjacency;
    bool is_vertex = false;
};

/// Simplex-lattice ansatz: C(m+k-1, k-1) nodes with neighbor relations.
struct AnsatzMesh {
    int k = 0;
    int resolution = 0;
    std::vector<MeshNode> nodes;
    std::vector<int> anchors;  // node id of the vertex for each objective
};

/// All barycentric weight vectors (i_1/m, ..., i_k/m) with nonnegative
/// integer multi-indices summing to m, in lexicographic multi-index order.
inline std::vector<Vec> simplex_lattice(int k, int m) {
    if (k < 2 || m < 1) throw std::invalid_argument("simplex_lattice requires k >= 2, m >= 1");
    std::vector<Vec> out;
    std::vector<int> idx(k, 0);
    const auto emit = [&] {
        Vec w(k);
        for (int i = 0; i < k; ++i) w[i] = static_cast<double>(idx[i]) / m;
        out.push_back(std::move(w));
    };
    // Lexicographic enumeration over the first k-1 components; the last
    // component absorbs the remainder.
    const std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == k - 1) {
            idx[pos] = remaining;
            emit();
            return;
        }
        for (int i = 0; i <= remaining; ++i) {
            idx[pos] = i;
            rec(pos + 1, remaining - i);
        }
    };
    rec(0, m);
    return out;
}

/// Builds the adjacency pairs for a lattice. Constraint pairs are emitted
/// only along directions inside the minimal simplex face containing each
/// node: a node with s positive weights gets s-1 pairs, so interior nodes
/// carry k-1 pairs, nodes on a simplex edge exactly one, and vertices none.
/// Moving one lattice step along pair axis `a` trades index a against the
/// face's dependent (last positive) component; both endpoints of every pair
/// are lattice nodes, with simplex vertices standing in for the anchors.
inline AnsatzMesh build_adjacency(const std::vector<Vec>& lattice, int k, int m) {
    AnsatzMesh mesh;
    mesh.k = k;
    mesh.resolution = m;
    mesh.nodes.resize(lattice.size());
    mesh.anchors.assign(k, -1);

    std::map<std::vector<int>, int> id_of;
    for (std::size_t p = 0; p < lattice.size(); ++p) {
        MeshNode& node = mesh.nodes[p];
        node.weights = lattice[p];
        node.index.resize(k);
        for (int i = 0; i < k; ++i)
            node.index[i] = static_cast<int>(std::lround(lattice[p][i] * m));
        id_of[node.index] = static_cast<int>(p);
    }

    for (std::size_t p = 0; p < mesh.nodes.size(); ++p) {
        MeshNode& node = mesh.nodes[p];
        std::vector<int> support;
        for (int i = 0; i < k; ++i)
            if (node.index[i] > 0) support.push_back(i);
        if (support.size() == 1) {
            node.is_vertex = true;
            mesh.anchors[support[0]] = static_cast<int>(p);
            continue;
        }
        const int dep = support.back();
        for (std::size_t t = 0; t + 1 < support.size(); ++t) {
            const int a = support[t];
            std::vector<int> idx = node.index;
            idx[a] -= 1;
            idx[dep] += 1;
            const int left = id_of.at(idx);
            idx[a] += 2;
            idx[dep] -= 2;
            const int right = id_of.at(idx);
            node.adjacency.push_back({a, left, right});
        }
    }
    return mesh;
}

/// Sets every node position to the barycentric combination of the
/// normalized anchor objectives; vertex nodes coincide with the anchors.
inline void initial_positions(AnsatzMesh& mesh, const AnchorSet& anchors) {
    std::vector<Vec> fn(mesh.k);
    for (int i = 0; i < mesh.k; ++i) fn[i] = normalize(anchors.anchor_objectives[i], anchors);
    for (MeshNode& node : mesh.nodes) {
        node.position.assign(mesh.k, 0.0);
        for (int i = 0; i < mesh.k; ++i)
            for (int c = 0; c < mesh.k; ++c) node.position[c] += node.weights[i] * fn[i][c];
    }
}

}  // namespace evenfront
