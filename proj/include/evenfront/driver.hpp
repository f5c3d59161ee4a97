#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "builtin.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "problem.hpp"
#include "solver.hpp"

namespace evenfront {

struct anchor_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct assembly_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { jacobi, gauss_seidel, serial_march, ws_scan };

inline std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::jacobi: return "jacobi";
        case RunMode::gauss_seidel: return "gauss-seidel";
        case RunMode::serial_march: return "serial-march";
        case RunMode::ws_scan: return "ws-scan";
    }
    return "unknown";
}

struct RunOptions {
    int resolution = 10;      // simplex-lattice subdivision m
    int max_sweeps = 10;
    double move_tol = 1e-4;   // normalized objective space
    RunMode mode = RunMode::jacobi;
    double gamma = 0.0;       // serial-march step
    int points = 0;           // serial-march / ws-scan sample count
    unsigned seed = 0;        // reserved; runs are deterministic
    int threads = 1;          // jacobi sweep workers
    // Proximal weight on the subproblem's lambda block, centered on the
    // node's barycentric weights. The weighted-sum objective is degenerate in
    // lambda (any exact optimum pushes lambda onto a simplex vertex, which
    // drags samples along the front and destroys even spacing); the proximal
    // term makes the lambda block strictly convex so each solve returns the
    // stationary point nearest the node's own weights.
    double lambda_prox = 10.0;
    // Proximal weight on the design block, centered on the node's previous
    // design (internally rescaled coordinates). The equispacing constraint
    // set can intersect the front in more than one branch; this term makes
    // each re-solve pick the branch nearest the node's current state instead
    // of hopping between branches from sweep to sweep. At a mesh fixed point
    // the center coincides with the solution, so the fixed points of the
    // sweep iteration are unbiased.
    double design_prox = 2.0;
    SolverOptions solver;
};

struct FrontSample {
    int node = -1;
    Vec x;
    Vec f_raw;
    Vec f_norm;
    Vec lambda;
    NlpStatus status = NlpStatus::max_iterations;
    bool is_vertex = false;
};

struct Front {
    std::string problem;
    std::vector<FrontSample> samples;
    AnchorSet anchors;
    int iterations_run = 0;
    long long fe_total = 0;
    std::map<std::string, long long> fe_by_phase;
    std::string note;
};

namespace detail {

// Shared evaluation core of one subproblem: computes F(x), its normalized
// image and the constraint values once per distinct x, so that the objective,
// the inequality closures and every equispacing constraint of an NlpInstance
// account for a single function evaluation per probed point. Single-owner
// (one solver call); not shared across workers.
class CachedProblemEval {
public:
    CachedProblemEval(const MooProblem& problem, const AnchorSet* anchors,
                      EvaluationCounter* counter, std::string phase)
        : problem_(problem), anchors_(anchors), counter_(counter),
          phase_(std::move(phase)) {}

    struct Entry {
        Vec x, f_raw, f_norm, g, h;
    };

    const Entry& at(const Vec& x) const {
        for (std::size_t i = 0; i < cache_.size(); ++i) {
            if (cache_[i].x == x) {
                if (i != 0) std::swap(cache_[0], cache_[i]);
                return cache_[0];
            }
        }
        Entry e;
        e.x = x;
        e.f_raw = problem_.objectives(x);
        if (counter_) counter_->record(in_fd_probe ? phase_ + "/fd" : phase_);
        for (int c = 0; c < problem_.k; ++c)
            if (!std::isfinite(e.f_raw[c]))
                throw evaluation_error("non-finite objective " + std::to_string(c) +
                                       " for problem " + problem_.name);
        if (anchors_) e.f_norm = normalize(e.f_raw, *anchors_);
        if (problem_.m > 0) e.g = problem_.inequalities(x);
        if (problem_.e > 0) e.h = problem_.equalities(x);
        if (cache_.size() >= kCapacity) cache_.pop_back();
        cache_.insert(cache_.begin(), std::move(e));
        return cache_.front();
    }

private:
    static constexpr std::size_t kCapacity = 8;
    const MooProblem& problem_;
    const AnchorSet* anchors_;
    EvaluationCounter* counter_;
    std::string phase_;
    mutable std::vector<Entry> cache_;
};

inline Vec box_center(const MooProblem& problem) {
    Vec c(problem.n);
    for (int i = 0; i < problem.n; ++i) c[i] = 0.5 * (problem.lower[i] + problem.upper[i]);
    return c;
}

// Single-objective solve of min F(x) over the problem's feasible set, with
// optional inequality caps on other objective values.
inline NlpResult minimize_objective(
    const MooProblem& problem, int objective_index, const Vec& start,
    const std::vector<std::pair<int, double>>& pinned_objectives,
    const SolverOptions& opts, EvaluationCounter* counter, const std::string& phase) {
    auto ce = std::make_shared<CachedProblemEval>(problem, nullptr, counter, phase);
    NlpInstance inst;
    inst.dim = problem.n;
    inst.lower = problem.lower;
    inst.upper = problem.upper;
    inst.objective = [ce, objective_index](const Vec& v) {
        return ce->at(v).f_raw[objective_index];
    };
    for (int j = 0; j < problem.m; ++j)
        inst.ineq_constraints.push_back([ce, j](const Vec& v) { return ce->at(v).g[j]; });
    for (int l = 0; l < problem.e; ++l)
        inst.eq_constraints.push_back([ce, l](const Vec& v) { return ce->at(v).h[l]; });
    // Pinning an objective at its attained minimum as a strict equality is
    // degenerate (the feasible set is the argmin set); a small slack band
    // keeps the refinement well-posed without measurably moving the anchor.
    for (const auto& [idx, value] : pinned_objectives) {
        const double slack = 10.0 * opts.feas_tol * (1.0 + std::abs(value));
        inst.ineq_constraints.push_back([ce, idx = idx, bound = value + slack](const Vec& v) {
            return ce->at(v).f_raw[idx] - bound;
        });
    }
    return solve_nlp(inst, start, opts);
}

}  // namespace detail

/// Per-objective anchor solves from the box center. Each minimum is refined
/// lexicographically (minimize the sum of the other objectives while pinning
/// the attained minimum) so that problems with non-unique individual
/// minimizers still produce k distinct, spanning anchor points.
inline AnchorSet compute_anchors(const MooProblem& problem, const SolverOptions& opts,
                                 EvaluationCounter* counter = nullptr) {
    AnchorSet out;
    const Vec center = detail::box_center(problem);
    for (int i = 0; i < problem.k; ++i) {
        NlpResult stage1 =
            detail::minimize_objective(problem, i, center, {}, opts, counter, "anchors");
        if (stage1.status != NlpStatus::converged)
            throw anchor_error("anchor solve failed for objective " + std::to_string(i) +
                               " (" + to_string(stage1.status) + ")");
        // Lexicographic refinement in cyclic objective order: holding every
        // previously minimized objective at its attained value, minimize the
        // next one. Problems whose individual minima are attained along whole
        // sub-fronts (symmetric ties) need this to yield k distinct, spanning
        // anchors. A stage is accepted only when it improves its objective
        // substantially: the pin bands admit a sqrt-of-slack drift in x, so a
        // noise-scale "improvement" would trade away the accuracy of anchors
        // whose minimizers are already unique.
        Vec best = stage1.v_star;
        EvaluationCounter fallback;
        std::vector<std::pair<int, double>> pins{{i, stage1.objective_value}};
        for (int s = 1; s < problem.k; ++s) {
            const int j = (i + s) % problem.k;
            const double before = evaluate_counted(problem, best,
                                                   counter ? *counter : fallback,
                                                   "anchors")[j];
            const NlpResult stage = detail::minimize_objective(
                problem, j, best, pins, opts, counter, "anchors");
            if (stage.status == NlpStatus::converged &&
                before - stage.objective_value > 0.01 * (1.0 + std::abs(before))) {
                best = stage.v_star;
                pins.emplace_back(j, stage.objective_value);
            } else {
                pins.emplace_back(j, before);
            }
        }
        out.minimizers.push_back(std::move(best));
    }
    EvaluationCounter fallback;
    for (int i = 0; i < problem.k; ++i)
        out.anchor_objectives.push_back(evaluate_counted(
            problem, out.minimizers[i], counter ? *counter : fallback, "anchors"));
    out.utopia = out.anchor_objectives[0];
    out.nadir_estimate = out.anchor_objectives[0];
    for (int i = 1; i < problem.k; ++i)
        for (int c = 0; c < problem.k; ++c) {
            out.utopia[c] = std::min(out.utopia[c], out.anchor_objectives[i][c]);
            out.nadir_estimate[c] = std::max(out.nadir_estimate[c], out.anchor_objectives[i][c]);
        }
    return out;
}

/// Assembles the scalarized, equispacing-constrained subproblem of one mesh
/// node over v = (x, lambda). neighbor_positions must contain the normalized
/// position of every reference in node.adjacency.
inline NlpInstance assemble_subproblem(const MooProblem& problem, const AnchorSet& anchors,
                                       const MeshNode& node,
                                       const std::map<int, Vec>& neighbor_positions,
                                       EvaluationCounter* counter = nullptr,
                                       const std::string& phase = "sweep") {
    const int n = problem.n;
    const int k = problem.k;
    auto ce = std::make_shared<detail::CachedProblemEval>(problem, &anchors, counter, phase);
    const auto design = [n](const Vec& v) { return Vec(v.begin(), v.begin() + n); };

    NlpInstance inst;
    inst.dim = n + k;
    inst.lower = problem.lower;
    inst.upper = problem.upper;
    inst.lower.insert(inst.lower.end(), k, 0.0);
    inst.upper.insert(inst.upper.end(), k, 1.0);

    inst.objective = [ce, design, n, k](const Vec& v) {
        const auto& e = ce->at(design(v));
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += v[n + i] * e.f_norm[i];
        return s;
    };
    for (int j = 0; j < problem.m; ++j)
        inst.ineq_constraints.push_back(
            [ce, design, j](const Vec& v) { return ce->at(design(v)).g[j]; });
    for (int l = 0; l < problem.e; ++l)
        inst.eq_constraints.push_back(
            [ce, design, l](const Vec& v) { return ce->at(design(v)).h[l]; });
    inst.eq_constraints.push_back([n, k](const Vec& v) {
        double s = -1.0;
        for (int i = 0; i < k; ++i) s += v[n + i];
        return s;
    });
    for (const AdjacencyPair& pair : node.adjacency) {
        const auto left = neighbor_positions.find(pair.left);
        const auto right = neighbor_positions.find(pair.right);
        if (left == neighbor_positions.end())
            throw assembly_error("missing neighbor position for node " +
                                 std::to_string(pair.left));
        if (right == neighbor_positions.end())
            throw assembly_error("missing neighbor position for node " +
                                 std::to_string(pair.right));
        inst.eq_constraints.push_back(
            [ce, design, fl = left->second, fr = right->second](const Vec& v) {
                const auto& e = ce->at(design(v));
                return dist_sq(e.f_norm, fl) - dist_sq(e.f_norm, fr);
            });
    }
    return inst;
}

/// Warm-start state carried across sweeps.
struct SweepState {
    std::vector<Vec> x;
    std::vector<Vec> lambda;
    std::vector<NlpStatus> status;
    // Neighbor positions each node saw at its last solve; lets settled
    // nodes skip re-solves when nothing around them moved.
    std::vector<std::map<int, Vec>> last_seen;
    // Multiplier/penalty estimates per node, warm-starting re-solves.
    std::vector<DualState> duals;
};

inline SweepState init_sweep_state(const AnsatzMesh& mesh, const AnchorSet& anchors) {
    SweepState st;
    const std::size_t count = mesh.nodes.size();
    st.x.resize(count);
    st.lambda.resize(count);
    st.status.assign(count, NlpStatus::max_iterations);
    st.last_seen.resize(count);
    st.duals.resize(count);
    const int n = static_cast<int>(anchors.minimizers[0].size());
    for (std::size_t p = 0; p < count; ++p) {
        const MeshNode& node = mesh.nodes[p];
        st.lambda[p] = node.weights;
        st.x[p].assign(n, 0.0);
        for (int i = 0; i < mesh.k; ++i)
            for (int c = 0; c < n; ++c) st.x[p][c] += node.weights[i] * anchors.minimizers[i][c];
        if (node.is_vertex) {
            for (int i = 0; i < mesh.k; ++i)
                if (mesh.anchors[i] == static_cast<int>(p)) st.x[p] = anchors.minimizers[i];
            st.status[p] = NlpStatus::converged;
        }
    }
    return st;
}

/// One sweep over all non-vertex mesh nodes. Jacobi mode solves every node
/// against a frozen snapshot of sweep-start positions (parallelizable,
/// deterministic); Gauss-Seidel visits nodes in lattice order with the
/// freshest neighbor values. Returns the maximum node displacement in
/// normalized objective space. Failed subproblems keep their prior position.
inline double sweep(const MooProblem& problem, AnsatzMesh& mesh, const AnchorSet& anchors,
                    SweepState& state, const RunOptions& opts, EvaluationCounter& counter,
                    const std::string& phase = "sweep") {
    const std::size_t count = mesh.nodes.size();
    const std::vector<Vec> snapshot = [&] {
        std::vector<Vec> s(count);
        for (std::size_t p = 0; p < count; ++p) s[p] = mesh.nodes[p].position;
        return s;
    }();
    const double skip_tol = opts.solver.feas_tol;
    const SolverOptions& sub = opts.solver;

    struct Outcome {
        bool solved = false;
        Vec position;
        Vec x, lambda;
        NlpStatus status = NlpStatus::numerical_failure;
        bool accepted = false;
    };

    auto solve_node = [&](std::size_t p, const std::function<const Vec&(int)>& pos_of) {
        Outcome out;
        const MeshNode& node = mesh.nodes[p];
        if (node.is_vertex) return out;

        std::map<int, Vec> neighbors;
        for (const AdjacencyPair& pair : node.adjacency) {
            neighbors[pair.left] = pos_of(pair.left);
            neighbors[pair.right] = pos_of(pair.right);
        }
        const bool settled = state.status[p] == NlpStatus::converged;
        if (settled && neighbors == state.last_seen[p])
            return out;  // nothing moved around a settled node
        if (settled && !state.last_seen[p].empty()) {
            bool moved = false;
            for (const auto& [id, pos] : neighbors) {
                const auto it = state.last_seen[p].find(id);
                if (it == state.last_seen[p].end() || dist(pos, it->second) > skip_tol) {
                    moved = true;
                    break;
                }
            }
            if (!moved) return out;
        }

        out.solved = true;
        try {
            const NlpInstance inst = assemble_subproblem(problem, anchors, node, neighbors,
                                                         &counter, phase);
            SolverOptions node_opts = sub;
            if (opts.lambda_prox > 0.0 || opts.design_prox > 0.0) {
                node_opts.prox_weight.assign(problem.n, opts.design_prox);
                node_opts.prox_weight.insert(node_opts.prox_weight.end(), problem.k,
                                             opts.lambda_prox);
                node_opts.prox_center = state.x[p];
                node_opts.prox_center.insert(node_opts.prox_center.end(),
                                             node.weights.begin(), node.weights.end());
            }
            Vec v0 = state.x[p];
            v0.insert(v0.end(), state.lambda[p].begin(), state.lambda[p].end());
            NlpResult res = solve_nlp(inst, v0, node_opts, &state.duals[p]);
            if (res.status != NlpStatus::converged) {
                // Stale multipliers can strand a re-solve; retry cold once.
                state.duals[p] = DualState{};
                res = solve_nlp(inst, v0, node_opts, &state.duals[p]);
            }
            out.status = res.status;
            // Failed subproblems keep their prior position; a single stray
            // iterate accepted into the mesh poisons every neighbor through
            // the coupling constraints.
            if (res.status == NlpStatus::converged && all_finite(res.v_star)) {
                out.x.assign(res.v_star.begin(), res.v_star.begin() + problem.n);
                out.lambda.assign(res.v_star.begin() + problem.n, res.v_star.end());
                out.position = normalize(problem.objectives(out.x), anchors);
                counter.record(phase);
                out.accepted = true;
            }
        } catch (const evaluation_error&) {
            out.status = NlpStatus::numerical_failure;
        }
        if (out.accepted) state.last_seen[p] = std::move(neighbors);
        return out;
    };

    std::vector<Outcome> outcomes(count);
    if (opts.mode == RunMode::gauss_seidel) {
        for (std::size_t p = 0; p < count; ++p) {
            outcomes[p] = solve_node(
                p, [&](int id) -> const Vec& { return mesh.nodes[id].position; });
            if (outcomes[p].accepted) mesh.nodes[p].position = outcomes[p].position;
        }
        // restore: displacements computed below against the snapshot
        for (std::size_t p = 0; p < count; ++p)
            if (outcomes[p].accepted) mesh.nodes[p].position = snapshot[p];
    } else {
        const auto pos_of = [&](int id) -> const Vec& { return snapshot[id]; };
        const int workers = std::max(1, opts.threads);
        if (workers == 1) {
            for (std::size_t p = 0; p < count; ++p) outcomes[p] = solve_node(p, pos_of);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t p = w; p < count; p += workers)
                        outcomes[p] = solve_node(p, pos_of);
                });
            }
            for (auto& t : pool) t.join();
        }
    }

    double max_move = 0.0;
    for (std::size_t p = 0; p < count; ++p) {
        Outcome& out = outcomes[p];
        if (!out.solved) continue;
        state.status[p] = out.status;
        if (!out.accepted) continue;
        max_move = std::max(max_move, dist(out.position, snapshot[p]));
        mesh.nodes[p].position = std::move(out.position);
        state.x[p] = std::move(out.x);
        state.lambda[p] = std::move(out.lambda);
    }
    return max_move;
}

namespace detail {

inline Front collect_front(const MooProblem& problem, const AnsatzMesh& mesh,
                           const AnchorSet& anchors, const SweepState& state,
                           int iterations, const EvaluationCounter& counter) {
    Front front;
    front.problem = problem.name;
    front.anchors = anchors;
    front.iterations_run = iterations;
    for (std::size_t p = 0; p < mesh.nodes.size(); ++p) {
        FrontSample s;
        s.node = static_cast<int>(p);
        s.x = state.x[p];
        s.lambda = state.lambda[p];
        s.f_norm = mesh.nodes[p].position;
        s.f_raw = denormalize(s.f_norm, anchors);
        s.status = state.status[p];
        s.is_vertex = mesh.nodes[p].is_vertex;
        front.samples.push_back(std::move(s));
    }
    front.fe_total = counter.total();
    front.fe_by_phase = counter.per_phase();
    return front;
}

}  // namespace detail

/// Full homotopy run: anchors, ansatz mesh, then Jacobi or Gauss-Seidel
/// sweeps until the largest node move falls below move_tol or max_sweeps
/// is reached.
inline Front run_homotopy(const MooProblem& problem, const RunOptions& opts,
                          EvaluationCounter* external_counter = nullptr) {
    if (opts.mode != RunMode::jacobi && opts.mode != RunMode::gauss_seidel)
        throw std::invalid_argument("run_homotopy requires jacobi or gauss-seidel mode");
    EvaluationCounter local;
    EvaluationCounter& counter = external_counter ? *external_counter : local;

    const AnchorSet anchors = compute_anchors(problem, opts.solver, &counter);
    AnsatzMesh mesh = build_adjacency(simplex_lattice(problem.k, opts.resolution),
                                      problem.k, opts.resolution);
    initial_positions(mesh, anchors);
    SweepState state = init_sweep_state(mesh, anchors);

    int iterations = 0;
    for (int s = 0; s < opts.max_sweeps; ++s) {
        const double moved = sweep(problem, mesh, anchors, state, opts, counter);
        ++iterations;
        if (moved < opts.move_tol) break;
    }
    return detail::collect_front(problem, mesh, anchors, state, iterations, counter);
}

/// Serial marching baseline for bi-objective problems: seed at the first
/// objective's minimizer, then repeatedly minimize the weighted sum subject
/// to a fixed-step spacing constraint ||F(x_p) - F(x_{p-1})||^2 = gamma^2
/// (raw objective space). Truncates when a step cannot be completed or the
/// opposite anchor is within one step.
inline Front march_biobjective(const MooProblem& problem, const RunOptions& opts,
                               EvaluationCounter* external_counter = nullptr) {
    if (problem.k != 2) throw std::invalid_argument("serial-march requires k = 2");
    if (opts.gamma <= 0.0) throw std::invalid_argument("serial-march requires gamma > 0");
    EvaluationCounter local;
    EvaluationCounter& counter = external_counter ? *external_counter : local;

    const AnchorSet anchors = compute_anchors(problem, opts.solver, &counter);
    Front front;
    front.problem = problem.name;
    front.anchors = anchors;

    const int n = problem.n;
    const int steps = std::max(1, opts.points);
    Vec x_prev = anchors.minimizers[0];
    Vec f_prev = anchors.anchor_objectives[0];
    const Vec& f_far = anchors.anchor_objectives[1];

    FrontSample seed;
    seed.node = 0;
    seed.x = x_prev;
    seed.f_raw = f_prev;
    seed.f_norm = normalize(f_prev, anchors);
    seed.lambda = Vec{1.0, 0.0};
    seed.status = NlpStatus::converged;
    seed.is_vertex = true;
    front.samples.push_back(std::move(seed));

    Vec x_prev2 = x_prev;
    DualState duals;  // multipliers vary slowly along the march
    for (int p = 1; p <= steps; ++p) {
        auto ce = std::make_shared<detail::CachedProblemEval>(problem, nullptr, &counter, "march");
        // Weight ramp 0 -> 1 along the march. A weight left free to the
        // optimizer collapses toward whichever objective is locally smaller
        // and can pull the step back toward the seed anchor; the fixed ramp
        // keeps every step progressing toward the opposite anchor.
        const double w = std::min(1.0, static_cast<double>(p) / steps);
        NlpInstance inst;
        inst.dim = n;
        inst.lower = problem.lower;
        inst.upper = problem.upper;
        inst.objective = [ce, w](const Vec& v) {
            const auto& e = ce->at(v);
            return (1.0 - w) * e.f_raw[0] + w * e.f_raw[1];
        };
        for (int j = 0; j < problem.m; ++j)
            inst.ineq_constraints.push_back([ce, j](const Vec& v) { return ce->at(v).g[j]; });
        for (int l = 0; l < problem.e; ++l)
            inst.eq_constraints.push_back([ce, l](const Vec& v) { return ce->at(v).h[l]; });
        inst.eq_constraints.push_back(
            [ce, f_prev, g2 = opts.gamma * opts.gamma](const Vec& v) {
                return dist_sq(ce->at(v).f_raw, f_prev) - g2;
            });
        // March monotonically toward the opposite anchor: the fixed-length
        // step circle around F_{p-1} intersects the attainable curve on both
        // sides, and near the seed the weighted objective alone can prefer
        // the backtracking intersection.
        inst.ineq_constraints.push_back(
            [ce, f_far, cap = dist_sq(f_prev, f_far)](const Vec& v) {
                return dist_sq(ce->at(v).f_raw, f_far) - cap;
            });

        // Warm start: forward extrapolation of the design trajectory.
        Vec v0(n);
        if (p == 1) {
            const double span = dist(f_prev, f_far);
            const double t = span > 0.0 ? std::min(1.0, opts.gamma / span) : 0.0;
            for (int c = 0; c < n; ++c)
                v0[c] = x_prev[c] + t * (anchors.minimizers[1][c] - x_prev[c]);
        } else {
            for (int c = 0; c < n; ++c) v0[c] = 2.0 * x_prev[c] - x_prev2[c];
        }

        const NlpResult res = solve_nlp(inst, std::move(v0), opts.solver, &duals);
        if (res.status != NlpStatus::converged) {
            front.note = "truncated at step " + std::to_string(p) + " (" +
                         to_string(res.status) + ")";
            break;
        }
        Vec x_new = res.v_star;
        const Vec f_new = ce->at(x_new).f_raw;

        FrontSample s;
        s.node = p;
        s.x = x_new;
        s.f_raw = f_new;
        s.f_norm = normalize(f_new, anchors);
        s.lambda = Vec{1.0 - w, w};
        s.status = res.status;
        front.samples.push_back(std::move(s));

        x_prev2 = std::move(x_prev);
        x_prev = std::move(x_new);
        f_prev = f_new;
        ++front.iterations_run;
        if (dist(f_new, f_far) < opts.gamma) break;  // reached the far anchor
    }
    front.fe_total = counter.total();
    front.fe_by_phase = counter.per_phase();
    return front;
}

/// Weighted-sum baseline: one unconstrained-in-lambda scalarization per
/// weight vector on a uniform simplex lattice, no spacing constraints.
inline Front ws_scan(const MooProblem& problem, const RunOptions& opts,
                     EvaluationCounter* external_counter = nullptr) {
    if (opts.points < 2) throw std::invalid_argument("ws-scan requires points >= 2");
    EvaluationCounter local;
    EvaluationCounter& counter = external_counter ? *external_counter : local;

    const AnchorSet anchors = compute_anchors(problem, opts.solver, &counter);

    // Smallest lattice with at least the requested number of points
    // (exactly P whenever P is a lattice cardinality).
    int m = 1;
    auto lattice_count = [&](int mm) {
        long long c = 1;
        for (int j = 1; j < problem.k; ++j) c = c * (mm + j) / j;
        return c;
    };
    while (lattice_count(m) < opts.points) ++m;
    const std::vector<Vec> weights = simplex_lattice(problem.k, m);

    Front front;
    front.problem = problem.name;
    front.anchors = anchors;
    const Vec center = detail::box_center(problem);
    for (std::size_t w = 0; w < weights.size(); ++w) {
        auto ce = std::make_shared<detail::CachedProblemEval>(problem, &anchors, &counter, "ws");
        NlpInstance inst;
        inst.dim = problem.n;
        inst.lower = problem.lower;
        inst.upper = problem.upper;
        inst.objective = [ce, lam = weights[w], k = problem.k](const Vec& v) {
            const auto& e = ce->at(v);
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += lam[i] * e.f_norm[i];
            return s;
        };
        for (int j = 0; j < problem.m; ++j)
            inst.ineq_constraints.push_back([ce, j](const Vec& v) { return ce->at(v).g[j]; });
        for (int l = 0; l < problem.e; ++l)
            inst.eq_constraints.push_back([ce, l](const Vec& v) { return ce->at(v).h[l]; });
        const NlpResult res = solve_nlp(inst, center, opts.solver);

        FrontSample s;
        s.node = static_cast<int>(w);
        s.lambda = weights[w];
        s.x = res.v_star;
        s.f_raw = ce->at(res.v_star).f_raw;
        s.f_norm = normalize(s.f_raw, anchors);
        s.status = res.status;
        front.samples.push_back(std::move(s));
    }
    front.iterations_run = 1;
    front.fe_total = counter.total();
    front.fe_by_phase = counter.per_phase();
    return front;
}

/// Residual of the equispacing constraints at the front's final positions,
/// over pairs owned by converged non-vertex nodes.
inline double equispacing_residual(const Front& front, const AnsatzMesh& mesh) {
    std::vector<Vec> positions(mesh.nodes.size());
    for (const FrontSample& s : front.samples)
        if (s.node >= 0 && s.node < static_cast<int>(positions.size()))
            positions[s.node] = s.f_norm;
    double worst = 0.0;
    for (const FrontSample& s : front.samples) {
        if (s.is_vertex || s.status != NlpStatus::converged) continue;
        for (const AdjacencyPair& pair : mesh.nodes[s.node].adjacency) {
            const Vec& fl = positions[pair.left];
            const Vec& fr = positions[pair.right];
            if (fl.empty() || fr.empty()) continue;
            worst = std::max(worst,
                             std::abs(dist_sq(s.f_norm, fl) - dist_sq(s.f_norm, fr)));
        }
    }
    return worst;
}

}  // namespace evenfront
