#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "mesh.hpp"

namespace evenfront {

struct metric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class HvConvention { reference_dominated, origin_attained };

struct HypervolumeRequest {
    std::vector<Vec> front;
    Vec reference;  // used by the reference-dominated convention
    HvConvention convention = HvConvention::reference_dominated;
};

namespace detail {

// Volume of the union of boxes [p, ref] over the first d coordinates.
// Recursive dimension sweep: slice along coordinate d-1 at the distinct
// point coordinates and recurse on the points covering each slab.
inline double union_boxes(const std::vector<Vec>& pts, const Vec& ref, int d) {
    if (pts.empty()) return 0.0;
    if (d == 1) {
        double lo = pts[0][0];
        for (const Vec& p : pts) lo = std::min(lo, p[0]);
        return std::max(0.0, ref[0] - lo);
    }
    std::vector<double> cuts;
    cuts.reserve(pts.size());
    for (const Vec& p : pts) cuts.push_back(p[d - 1]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double vol = 0.0;
    std::vector<Vec> covering;
    for (std::size_t s = 0; s < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double hi = (s + 1 < cuts.size()) ? cuts[s + 1] : ref[d - 1];
        if (hi <= lo) continue;
        covering.clear();
        for (const Vec& p : pts)
            if (p[d - 1] <= lo) covering.push_back(p);
        vol += (hi - lo) * union_boxes(covering, ref, d - 1);
    }
    return vol;
}

}  // namespace detail

/// Exact dominated hypervolume (minimization).
///   reference-dominated: volume of the union of [p, reference] boxes.
///   origin-attained: volume of the union of [0, p] boxes.
inline double hypervolume(const HypervolumeRequest& req) {
    if (req.front.empty()) return 0.0;
    const int k = static_cast<int>(req.front.front().size());
    if (req.convention == HvConvention::reference_dominated) {
        if (static_cast<int>(req.reference.size()) != k)
            throw metric_error("reference point dimension mismatch");
        for (std::size_t i = 0; i < req.front.size(); ++i)
            for (int c = 0; c < k; ++c)
                if (req.front[i][c] > req.reference[c])
                    throw metric_error("front point " + std::to_string(i) +
                                       " not dominated by the reference point");
        return detail::union_boxes(req.front, req.reference, k);
    }
    // Origin-attained: [0, p] maps to [-p, 0] under y -> -y, which is the
    // reference-dominated form with reference at the origin.
    std::vector<Vec> mirrored;
    mirrored.reserve(req.front.size());
    for (std::size_t i = 0; i < req.front.size(); ++i) {
        Vec q(k);
        for (int c = 0; c < k; ++c) {
            // Clamp small negatives: normalized fronts subtract a utopia value
            // computed by an iterative solver, so points can undershoot zero by
            // roughly the anchor-solve tolerance. Reject anything larger.
            if (req.front[i][c] < -1e-4)
                throw metric_error("front point " + std::to_string(i) +
                                   " has a negative component under the origin convention");
            q[c] = -std::max(req.front[i][c], 0.0);
        }
        mirrored.push_back(std::move(q));
    }
    return detail::union_boxes(mirrored, Vec(k, 0.0), k);
}

/// Monte-Carlo hypervolume estimate over the bounding box; the independent
/// verification oracle for the exact computation. Deterministic per seed.
inline double mc_hypervolume_oracle(const HypervolumeRequest& req, long long samples,
                                    std::uint64_t seed) {
    if (req.front.empty()) return 0.0;
    const int k = static_cast<int>(req.front.front().size());
    Vec lo(k), hi(k);
    const bool origin = req.convention == HvConvention::origin_attained;
    for (int c = 0; c < k; ++c) {
        double pmin = req.front[0][c], pmax = req.front[0][c];
        for (const Vec& p : req.front) {
            pmin = std::min(pmin, p[c]);
            pmax = std::max(pmax, p[c]);
        }
        lo[c] = origin ? 0.0 : pmin;
        hi[c] = origin ? pmax : req.reference[c];
    }
    double box_vol = 1.0;
    for (int c = 0; c < k; ++c) box_vol *= std::max(0.0, hi[c] - lo[c]);
    if (box_vol <= 0.0) return 0.0;

    // splitmix-style generator; avoids distribution implementation details.
    std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ull;
    const auto next_unit = [&state] {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };

    long long hits = 0;
    Vec y(k);
    for (long long s = 0; s < samples; ++s) {
        for (int c = 0; c < k; ++c) y[c] = lo[c] + (hi[c] - lo[c]) * next_unit();
        for (const Vec& p : req.front) {
            bool inside = true;
            for (int c = 0; c < k; ++c) {
                const bool ok = origin ? (y[c] <= p[c]) : (p[c] <= y[c]);
                if (!ok) {
                    inside = false;
                    break;
                }
            }
            if (inside) {
                ++hits;
                break;
            }
        }
    }
    return box_vol * static_cast<double>(hits) / static_cast<double>(samples);
}

struct EvennessReport {
    double E = 0.0;
    Vec d_lower;  // nearest-neighbor distance per point
    Vec d_upper;  // largest empty-diametral-ball diameter per point
    double sigma = 0.0;
    double mean = 0.0;
};

/// Evenness E = sigma_d / mean_d over the pooled multiset of nearest-neighbor
/// distances d_i^l and largest empty-sphere diameters d_i^u. The d_i^u sphere
/// is fixed at the pair midpoint (Gabriel-neighbor rule): a pair (i, j)
/// qualifies when no third point lies strictly inside the ball with diameter
/// [i, j], and d_i^u is the largest qualifying pair distance.
inline EvennessReport evenness(const std::vector<Vec>& front) {
    const std::size_t n = front.size();
    if (n < 3) throw metric_error("evenness requires at least 3 points");
    const int k = static_cast<int>(front.front().size());

    std::vector<std::vector<double>> d2(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d2[i][j] = d2[j][i] = dist_sq(front[i], front[j]);

    EvennessReport rep;
    rep.d_lower.assign(n, 0.0);
    rep.d_upper.assign(n, 0.0);
    Vec mid(k);
    for (std::size_t i = 0; i < n; ++i) {
        double best_l = std::numeric_limits<double>::infinity();
        double best_u = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            best_l = std::min(best_l, d2[i][j]);
            if (d2[i][j] <= best_u) continue;
            // Diametral-ball emptiness check for the pair (i, j).
            for (int c = 0; c < k; ++c) mid[c] = 0.5 * (front[i][c] + front[j][c]);
            const double r2 = 0.25 * d2[i][j];
            bool empty = true;
            for (std::size_t q = 0; q < n; ++q) {
                if (q == i || q == j) continue;
                if (dist_sq(front[q], mid) < r2 * (1.0 - 1e-9)) {
                    empty = false;
                    break;
                }
            }
            if (empty) best_u = d2[i][j];
        }
        rep.d_lower[i] = std::sqrt(best_l);
        rep.d_upper[i] = std::sqrt(best_u);
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rep.d_lower[i] + rep.d_upper[i];
    rep.mean = sum / static_cast<double>(2 * n);
    if (rep.mean <= 0.0) throw metric_error("evenness undefined: zero mean distance");
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss += (rep.d_lower[i] - rep.mean) * (rep.d_lower[i] - rep.mean);
        ss += (rep.d_upper[i] - rep.mean) * (rep.d_upper[i] - rep.mean);
    }
    rep.sigma = std::sqrt(ss / static_cast<double>(2 * n));  // population sigma
    rep.E = rep.sigma / rep.mean;
    return rep;
}

/// Maximum over all nodes and adjacency pairs of the balance-constraint
/// residual | ||F_p - F_l||^2 - ||F_p - F_r||^2 | in normalized space.
/// `node_positions` is indexed by mesh node id; an empty entry skips the node.
inline double equispacing_residual(const std::vector<Vec>& node_positions,
                                   const AnsatzMesh& mesh) {
    double worst = 0.0;
    for (std::size_t p = 0; p < mesh.nodes.size(); ++p) {
        if (node_positions[p].empty()) continue;
        for (const AdjacencyPair& pair : mesh.nodes[p].adjacency) {
            const Vec& fl = node_positions[pair.left];
            const Vec& fr = node_positions[pair.right];
            if (fl.empty() || fr.empty()) continue;
            const double res = std::abs(dist_sq(node_positions[p], fl) -
                                        dist_sq(node_positions[p], fr));
            worst = std::max(worst, res);
        }
    }
    return worst;
}

}  // namespace evenfront
