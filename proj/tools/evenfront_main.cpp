#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <evenfront/evenfront.hpp>

namespace {

using namespace evenfront;

Vec parse_ref(const std::string& text) {
    Vec out;
    for (const auto& t : detail::split(text, ','))
        out.push_back(std::stod(t));
    return out;
}

std::vector<Vec> clamped_norm_points(const std::vector<Vec>& pts) {
    // Anchor rows sit numerically at 0 up to solver tolerance; clamp the dust
    // so the origin-attained precondition holds.
    std::vector<Vec> out = pts;
    for (Vec& p : out)
        for (double& v : p)
            if (v < 0.0 && v > -1e-9) v = 0.0;
    return out;
}

struct MetricValues {
    double evenness = std::numeric_limits<double>::quiet_NaN();
    double hypervolume = std::numeric_limits<double>::quiet_NaN();
};

MetricValues compute_metrics(const std::vector<Vec>& f_norm, const Vec& ref,
                             HvConvention convention) {
    MetricValues mv;
    try {
        mv.evenness = evenness(f_norm).E;
    } catch (const metric_error& e) {
        std::cerr << "warning: evenness unavailable: " << e.what() << "\n";
    }
    try {
        HypervolumeRequest req;
        req.front = convention == HvConvention::origin_attained ? clamped_norm_points(f_norm)
                                                                : f_norm;
        req.reference = ref;
        req.convention = convention;
        mv.hypervolume = hypervolume(req);
    } catch (const metric_error& e) {
        std::cerr << "warning: hypervolume unavailable: " << e.what() << "\n";
    }
    return mv;
}

int cmd_run(const std::string& problem_name, RunOptions& run_opts, const std::string& out_dir,
            const std::string& ref_text, const std::string& hv_convention,
            const std::string& dump_mesh_path) {
    const MooProblem problem = builtin_problem(problem_name);
    if (run_opts.mode == RunMode::serial_march) {
        if (problem.k != 2) throw CLI::ValidationError("--mode serial-march requires a bi-objective problem");
        if (run_opts.gamma <= 0.0) throw CLI::ValidationError("--mode serial-march requires --gamma > 0");
        if (run_opts.points < 1) throw CLI::ValidationError("--mode serial-march requires --points");
    }
    if (run_opts.mode == RunMode::ws_scan && run_opts.points < 2)
        throw CLI::ValidationError("--mode ws-scan requires --points >= 2");

    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    Front front;
    AnsatzMesh mesh;
    bool has_mesh = false;
    switch (run_opts.mode) {
        case RunMode::jacobi:
        case RunMode::gauss_seidel:
            front = run_homotopy(problem, run_opts);
            mesh = build_adjacency(simplex_lattice(problem.k, run_opts.resolution), problem.k,
                                   run_opts.resolution);
            has_mesh = true;
            break;
        case RunMode::serial_march:
            front = march_biobjective(problem, run_opts);
            break;
        case RunMode::ws_scan:
            front = ws_scan(problem, run_opts);
            break;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<Vec> f_norm;
    for (const FrontSample& s : front.samples) f_norm.push_back(s.f_norm);
    const HvConvention convention = hv_convention == "origin" ? HvConvention::origin_attained
                                                              : HvConvention::reference_dominated;
    const Vec ref = ref_text.empty() ? Vec(problem.k, 1.0) : parse_ref(ref_text);
    const MetricValues mv = compute_metrics(f_norm, ref, convention);

    RunReport report;
    report.problem = problem.name;
    report.mode = to_string(run_opts.mode);
    report.points = static_cast<int>(front.samples.size());
    report.fe_total = front.fe_total;
    report.fe_per_point = report.points > 0
                              ? static_cast<double>(front.fe_total) / report.points
                              : 0.0;
    report.sweeps = front.iterations_run;
    report.evenness = mv.evenness;
    report.hypervolume = mv.hypervolume;
    report.hv_convention = convention == HvConvention::origin_attained ? "origin" : "reference";
    report.hv_reference = ref;
    report.residual_max = has_mesh ? equispacing_residual(front, mesh)
                                   : std::numeric_limits<double>::quiet_NaN();
    report.wall_time = wall;
    report.fe_by_phase = front.fe_by_phase;
    report.note = front.note;
    for (const FrontSample& s : front.samples)
        if (s.is_vertex || s.status == NlpStatus::converged) ++report.converged;

    const std::filesystem::path out(out_dir);
    write_front_csv((out / "front.csv").string(), front, has_mesh ? &mesh : nullptr);
    write_report_json((out / "report.json").string(), report);
    write_front_svg((out / "front.svg").string(), f_norm);
    if (!dump_mesh_path.empty() && has_mesh) dump_mesh(dump_mesh_path, mesh);

    std::cout << "problem=" << report.problem << " mode=" << report.mode
              << " points=" << report.points << " converged=" << report.converged
              << " sweeps=" << report.sweeps << " fe_total=" << report.fe_total
              << " fe_per_point=" << report.fe_per_point << " evenness=" << report.evenness
              << " hypervolume=" << report.hypervolume << " (" << report.hv_convention << ")"
              << " residual_max=" << report.residual_max << " wall_time=" << report.wall_time
              << "s\n";
    if (!front.note.empty()) std::cout << "note: " << front.note << "\n";
    return 0;
}

int cmd_metrics(const std::string& front_path, const std::string& ref_text,
                const std::string& hv_convention, const std::string& mesh_path) {
    const LoadedFront loaded = read_front_csv(front_path);
    std::vector<Vec> f_norm;
    for (const auto& row : loaded.rows) f_norm.push_back(row.f_norm);
    const HvConvention convention = hv_convention == "origin" ? HvConvention::origin_attained
                                                              : HvConvention::reference_dominated;
    const Vec ref = ref_text.empty() ? Vec(loaded.k, 1.0) : parse_ref(ref_text);
    const MetricValues mv = compute_metrics(f_norm, ref, convention);

    int converged = 0;
    for (const auto& row : loaded.rows)
        if (row.status == "converged" || row.status == "vertex") ++converged;

    std::cout << "points " << loaded.rows.size() << "\n";
    std::cout << "converged " << converged << "\n";
    std::cout << "evenness " << detail::fmt(mv.evenness) << "\n";
    std::cout << "hypervolume " << detail::fmt(mv.hypervolume) << "\n";

    if (!mesh_path.empty()) {
        const AnsatzMesh mesh = read_mesh_dump(mesh_path);
        std::vector<Vec> positions(mesh.nodes.size());
        for (const auto& row : loaded.rows)
            if (row.id >= 0 && row.id < static_cast<int>(positions.size()))
                positions[row.id] = row.f_norm;
        double worst = 0.0;
        for (const auto& row : loaded.rows) {
            if (row.status != "converged") continue;
            for (const AdjacencyPair& pair : mesh.nodes[row.id].adjacency) {
                const Vec& fl = positions[pair.left];
                const Vec& fr = positions[pair.right];
                if (fl.empty() || fr.empty()) continue;
                worst = std::max(worst, std::abs(dist_sq(row.f_norm, fl) - dist_sq(row.f_norm, fr)));
            }
        }
        std::cout << "residual_max " << detail::fmt(worst) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniformly sampled Pareto front approximations via "
                 "equispacing-constrained homotopy"};
    app.require_subcommand(1);

    std::string problem_name, out_dir = ".", ref_text, hv_convention = "reference";
    std::string mode_text = "jacobi", fd_scheme_text = "forward", dump_mesh_path;
    RunOptions run_opts;

    CLI::App* run = app.add_subcommand("run", "run a benchmark and write front artifacts");
    run->add_option("--problem", problem_name, "built-in problem name")->required();
    run->add_option("--resolution", run_opts.resolution, "simplex-lattice subdivision m");
    run->add_option("--points", run_opts.points, "sample count for serial-march / ws-scan");
    run->add_option("--mode", mode_text, "jacobi | gauss-seidel | serial-march | ws-scan")
        ->check(CLI::IsMember({"jacobi", "gauss-seidel", "serial-march", "ws-scan"}));
    run->add_option("--gamma", run_opts.gamma, "serial-march step size");
    run->add_option("--max-sweeps", run_opts.max_sweeps, "sweep limit");
    run->add_option("--move-tol", run_opts.move_tol, "sweep convergence tolerance");
    run->add_option("--threads", run_opts.threads, "jacobi sweep workers");
    run->add_option("--feas-tol", run_opts.solver.feas_tol, "constraint tolerance");
    run->add_option("--opt-tol", run_opts.solver.opt_tol, "stationarity tolerance");
    run->add_option("--fd-scheme", fd_scheme_text, "forward | central")
        ->check(CLI::IsMember({"forward", "central"}));
    run->add_option("--fd-step", run_opts.solver.fd_step, "finite-difference step");
    run->add_option("--max-solver-iters", run_opts.solver.max_iters, "inner iteration budget");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--ref", ref_text, "hypervolume reference point v1,v2,...");
    run->add_option("--hv-convention", hv_convention, "reference | origin")
        ->check(CLI::IsMember({"reference", "origin"}));
    run->add_option("--dump-mesh", dump_mesh_path, "write the ansatz mesh to this path");

    std::string front_path, metrics_mesh_path;
    CLI::App* metrics = app.add_subcommand("metrics", "recompute metrics from a stored front");
    metrics->add_option("--front", front_path, "front.csv path")->required();
    metrics->add_option("--ref", ref_text, "hypervolume reference point v1,v2,...");
    metrics->add_option("--hv-convention", hv_convention, "reference | origin")
        ->check(CLI::IsMember({"reference", "origin"}));
    metrics->add_option("--dump-mesh", metrics_mesh_path, "mesh dump for the equispacing residual");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (mode_text == "gauss-seidel") run_opts.mode = evenfront::RunMode::gauss_seidel;
            else if (mode_text == "serial-march") run_opts.mode = evenfront::RunMode::serial_march;
            else if (mode_text == "ws-scan") run_opts.mode = evenfront::RunMode::ws_scan;
            else run_opts.mode = evenfront::RunMode::jacobi;
            run_opts.solver.fd_scheme = fd_scheme_text == "central"
                                            ? evenfront::FdScheme::central
                                            : evenfront::FdScheme::forward;
            return cmd_run(problem_name, run_opts, out_dir, ref_text, hv_convention,
                           dump_mesh_path);
        }
        return cmd_metrics(front_path, ref_text, hv_convention, metrics_mesh_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
