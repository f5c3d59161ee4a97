#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include <evenfront/builtin.hpp>
#include <evenfront/driver.hpp>

using namespace evenfront;

namespace {

bool same_samples(const Front& a, const Front& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i].x != b.samples[i].x) return false;
        if (a.samples[i].f_norm != b.samples[i].f_norm) return false;
        if (a.samples[i].lambda != b.samples[i].lambda) return false;
        if (a.samples[i].status != b.samples[i].status) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("anchors of the convex bi-objective toy problem") {
    const AnchorSet anchors = compute_anchors(builtin_problem("biobj-convex"), SolverOptions{});
    REQUIRE(anchors.anchor_objectives.size() == 2);
    CHECK(anchors.anchor_objectives[0][0] == Catch::Approx(0.0).margin(1e-4));
    CHECK(anchors.anchor_objectives[0][1] == Catch::Approx(4.0).margin(1e-4));
    CHECK(anchors.anchor_objectives[1][0] == Catch::Approx(4.0).margin(1e-4));
    CHECK(anchors.anchor_objectives[1][1] == Catch::Approx(0.0).margin(1e-4));
    CHECK(anchors.utopia[0] == Catch::Approx(0.0).margin(1e-4));
    CHECK(anchors.nadir_estimate[0] == Catch::Approx(4.0).margin(1e-4));
}

TEST_CASE("motta1 first anchor attains the constrained minimum of f1") {
    const MooProblem m1 = builtin_problem("motta1");
    EvaluationCounter counter;
    const AnchorSet anchors = compute_anchors(m1, SolverOptions{}, &counter);
    CHECK(anchors.anchor_objectives[0][0] == Catch::Approx(0.2).margin(1e-4));
    CHECK(anchors.minimizers[0][0] == Catch::Approx(0.2).margin(1e-3));
    CHECK(anchors.minimizers[0][1] == Catch::Approx(10.0).margin(1e-3));
    CHECK(anchors.minimizers[0][2] == Catch::Approx(10.0).margin(1e-3));
    // anchor feasibility for all objectives
    for (const Vec& x : anchors.minimizers) {
        const Vec g = m1.inequalities(x);
        for (double gj : g) CHECK(gj <= 1e-6);
    }
    CHECK(counter.total() > 0);
    CHECK(counter.per_phase().count("anchors") == 1);
}

TEST_CASE("dtlz2 anchors span the objective axes") {
    const AnchorSet anchors = compute_anchors(builtin_problem("dtlz2"), SolverOptions{});
    for (int i = 0; i < 3; ++i) {
        CHECK(anchors.anchor_objectives[i][i] == Catch::Approx(0.0).margin(1e-4));
        CHECK(anchors.utopia[i] == Catch::Approx(0.0).margin(1e-4));
        // each axis must have spread, otherwise normalization degenerates
        CHECK(anchors.nadir_estimate[i] > 0.5);
    }
}

TEST_CASE("subproblem assembly matches the node's face dimension") {
    const MooProblem m1 = builtin_problem("motta1");
    EvaluationCounter counter;
    const AnchorSet anchors = compute_anchors(m1, SolverOptions{}, &counter);
    AnsatzMesh mesh = build_adjacency(simplex_lattice(3, 4), 3, 4);
    initial_positions(mesh, anchors);

    auto positions_for = [&](const MeshNode& node) {
        std::map<int, Vec> out;
        for (const AdjacencyPair& pair : node.adjacency) {
            out[pair.left] = mesh.nodes[pair.left].position;
            out[pair.right] = mesh.nodes[pair.right].position;
        }
        return out;
    };

    for (const MeshNode& node : mesh.nodes) {
        if (node.is_vertex) continue;
        // Restricted map containing exactly the adjacency references: the
        // assembly must not need anything else (local-communication contract).
        const NlpInstance inst =
            assemble_subproblem(m1, anchors, node, positions_for(node), &counter);
        CHECK(inst.dim == m1.n + m1.k);
        CHECK(inst.ineq_constraints.size() == static_cast<std::size_t>(m1.m));
        // equalities: problem h (none) + simplex sum + one per pair
        CHECK(inst.eq_constraints.size() == 1 + node.adjacency.size());
        int positive = 0;
        for (int i : node.index)
            if (i > 0) ++positive;
        if (positive == 3) CHECK(inst.eq_constraints.size() == 3u);
        if (positive == 2) CHECK(inst.eq_constraints.size() == 2u);
    }
}

TEST_CASE("assembly rejects missing neighbor positions by reference id") {
    const MooProblem m1 = builtin_problem("motta1");
    const AnchorSet anchors = compute_anchors(m1, SolverOptions{});
    AnsatzMesh mesh = build_adjacency(simplex_lattice(3, 4), 3, 4);
    initial_positions(mesh, anchors);
    for (const MeshNode& node : mesh.nodes) {
        if (node.is_vertex) continue;
        std::map<int, Vec> missing;  // empty on purpose
        try {
            assemble_subproblem(m1, anchors, node, missing);
            FAIL("expected assembly_error");
        } catch (const assembly_error& e) {
            CHECK(std::string(e.what()).find(std::to_string(node.adjacency[0].left)) !=
                  std::string::npos);
        }
        break;
    }
}

TEST_CASE("midpoint balance constraint vanishes on the symmetric line") {
    MooProblem toy = builtin_problem("biobj-convex");
    AnchorSet anchors;
    anchors.minimizers = {Vec{0.0}, Vec{2.0}};
    anchors.anchor_objectives = {Vec{0.0, 4.0}, Vec{4.0, 0.0}};
    anchors.utopia = Vec{0.0, 0.0};
    anchors.nadir_estimate = Vec{4.0, 4.0};

    AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 2), 2, 2);
    initial_positions(mesh, anchors);
    const MeshNode& mid = mesh.nodes[1];
    std::map<int, Vec> nb{{0, Vec{0.0, 1.0}}, {2, Vec{1.0, 0.0}}};
    const NlpInstance inst = assemble_subproblem(toy, anchors, mid, nb);
    // x = 1 gives F = (1, 1), normalized (0.25, 0.25): equidistant from the
    // two neighbors by symmetry.
    const Vec v{1.0, 0.5, 0.5};
    const double balance = inst.eq_constraints.back()(v);
    CHECK(balance == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("one sweep moves the k=2 middle node onto the front curve") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 4;
    opts.max_sweeps = 1;
    EvaluationCounter counter;
    const AnchorSet anchors = compute_anchors(toy, opts.solver, &counter);
    AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 4), 2, 4);
    initial_positions(mesh, anchors);
    SweepState state = init_sweep_state(mesh, anchors);
    sweep(toy, mesh, anchors, state, opts, counter);

    REQUIRE(state.status[2] == NlpStatus::converged);
    const Vec& x = state.x[2];
    const Vec f = toy.objectives(x);
    // On the analytic front curve F2 = (sqrt(F1) - 2)^2.
    const double f2_curve = (std::sqrt(f[0]) - 2.0) * (std::sqrt(f[0]) - 2.0);
    CHECK(f[1] == Catch::Approx(f2_curve).margin(1e-6));
    // Balance against the (frozen) initial neighbor positions.
    const Vec fn = normalize(f, anchors);
    const Vec fl = Vec{0.25, 0.75};  // initial interpolants for m=4
    const Vec fr = Vec{0.75, 0.25};
    CHECK(std::abs(dist_sq(fn, fl) - dist_sq(fn, fr)) <= 1e-5);
}

TEST_CASE("a converged mesh is a fixed point of further sweeps") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 4;
    opts.max_sweeps = 10;
    EvaluationCounter counter;
    const AnchorSet anchors = compute_anchors(toy, opts.solver, &counter);
    AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 4), 2, 4);
    initial_positions(mesh, anchors);
    SweepState state = init_sweep_state(mesh, anchors);
    double moved = 1.0;
    for (int s = 0; s < opts.max_sweeps && moved >= opts.move_tol; ++s)
        moved = sweep(toy, mesh, anchors, state, opts, counter);
    REQUIRE(moved < opts.move_tol);
    // Settled nodes with unmoved neighbors are skipped: no displacement.
    const double again = sweep(toy, mesh, anchors, state, opts, counter);
    CHECK(again <= opts.solver.feas_tol);
}

TEST_CASE("jacobi runs are deterministic and thread-count independent") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 6;
    opts.max_sweeps = 3;
    const Front a = run_homotopy(toy, opts);
    const Front b = run_homotopy(toy, opts);
    CHECK(same_samples(a, b));
    CHECK(a.fe_total == b.fe_total);

    RunOptions threaded = opts;
    threaded.threads = 4;
    const Front c = run_homotopy(toy, threaded);
    CHECK(same_samples(a, c));
    CHECK(a.fe_total == c.fe_total);
}

TEST_CASE("homotopy on the toy problem lands on the analytic front, evenly") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 8;
    // Run to a mesh fixed point: the equispacing-residual bound is a property
    // of converged runs, not of an iteration cut off mid-settling.
    opts.move_tol = 1e-7;
    opts.max_sweeps = 500;
    const Front front = run_homotopy(toy, opts);
    REQUIRE(front.samples.size() == 9);
    std::vector<Vec> fn;
    for (const FrontSample& s : front.samples) {
        if (!s.is_vertex) {
            REQUIRE(s.status == NlpStatus::converged);
            const double f2_curve =
                (std::sqrt(s.f_raw[0]) - 2.0) * (std::sqrt(s.f_raw[0]) - 2.0);
            CHECK(s.f_raw[1] == Catch::Approx(f2_curve).margin(1e-5));
            // converged weights live on the unit simplex
            CHECK(s.lambda[0] + s.lambda[1] == Catch::Approx(1.0).margin(1e-6));
        }
        fn.push_back(s.f_norm);
    }
    CHECK(evenness(fn).E < 0.05);

    const AnsatzMesh mesh = build_adjacency(simplex_lattice(2, 8), 2, 8);
    CHECK(equispacing_residual(front, mesh) <= 10.0 * opts.solver.feas_tol);
}

TEST_CASE("gauss-seidel mode also converges on the toy problem") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 4;
    opts.mode = RunMode::gauss_seidel;
    const Front front = run_homotopy(toy, opts);
    for (const FrontSample& s : front.samples) {
        if (s.is_vertex) continue;
        CHECK(s.status == NlpStatus::converged);
        const double f2_curve = (std::sqrt(s.f_raw[0]) - 2.0) * (std::sqrt(s.f_raw[0]) - 2.0);
        CHECK(s.f_raw[1] == Catch::Approx(f2_curve).margin(1e-5));
    }
}

TEST_CASE("serial marching keeps the requested step length") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.mode = RunMode::serial_march;
    opts.gamma = 0.5;
    opts.points = 12;
    const Front f = march_biobjective(toy, opts);
    REQUIRE(f.samples.size() >= 3);
    for (std::size_t i = 1; i < f.samples.size(); ++i) {
        const double step = dist(f.samples[i].f_raw, f.samples[i - 1].f_raw);
        CHECK(step == Catch::Approx(opts.gamma).margin(1e-6));
    }
    // traversal completes: last sample within one step of the far anchor
    CHECK(dist(f.samples.back().f_raw, f.anchors.anchor_objectives[1]) < opts.gamma + 1e-9);
}

TEST_CASE("serial marching truncates when the step overshoots the front") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.mode = RunMode::serial_march;
    opts.gamma = 20.0;  // larger than any feasible objective distance
    opts.points = 5;
    const Front f = march_biobjective(toy, opts);
    CHECK(f.samples.size() <= 2);
    CHECK_FALSE(f.note.empty());
}

TEST_CASE("weighted-sum scan lands on the front and reproduces anchors at vertices") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.mode = RunMode::ws_scan;
    opts.points = 5;
    const Front f = ws_scan(toy, opts);
    REQUIRE(f.samples.size() == 5);
    for (const FrontSample& s : f.samples) {
        REQUIRE(s.status == NlpStatus::converged);
        const double f2_curve = (std::sqrt(s.f_raw[0]) - 2.0) * (std::sqrt(s.f_raw[0]) - 2.0);
        CHECK(s.f_raw[1] == Catch::Approx(f2_curve).margin(1e-4));
    }
    // vertex weights reproduce the anchors
    CHECK(dist(f.samples.front().f_raw, f.anchors.anchor_objectives[1]) < 1e-3);
    CHECK(dist(f.samples.back().f_raw, f.anchors.anchor_objectives[0]) < 1e-3);
}

TEST_CASE("mode and argument preconditions") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.mode = RunMode::serial_march;
    CHECK_THROWS_AS(run_homotopy(toy, opts), std::invalid_argument);
    CHECK_THROWS_AS(march_biobjective(toy, opts), std::invalid_argument);  // gamma unset
    opts.gamma = 0.5;
    CHECK_THROWS_AS(march_biobjective(builtin_problem("motta1"), opts),
                    std::invalid_argument);  // k != 2
    RunOptions ws;
    ws.mode = RunMode::ws_scan;
    ws.points = 1;
    CHECK_THROWS_AS(ws_scan(toy, ws), std::invalid_argument);
}

TEST_CASE("evaluation accounting separates phases and finite-difference overhead") {
    const MooProblem toy = builtin_problem("biobj-convex");
    RunOptions opts;
    opts.resolution = 4;
    opts.max_sweeps = 2;
    const Front front = run_homotopy(toy, opts);
    CHECK(front.fe_total > 0);
    long long by_phase = 0;
    for (const auto& [phase, n] : front.fe_by_phase) by_phase += n;
    CHECK(by_phase == front.fe_total);
    CHECK(front.fe_by_phase.count("anchors") == 1);
    CHECK(front.fe_by_phase.count("sweep/fd") == 1);
}
