#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace evenfront {

struct gradient_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FdScheme { forward, central };

struct SolverOptions {
    double feas_tol = 1e-6;
    double opt_tol = 1e-6;
    int max_iters = 200;  // inner-iteration budget for one solve
    double fd_step = 1e-6;
    FdScheme fd_scheme = FdScheme::forward;
    // Augmented-Lagrangian schedule.
    double penalty_init = 10.0;
    double penalty_growth = 10.0;
    int max_outer = 25;
    // Optional proximal regularization: adds 0.5 * prox_weight[i] * d_i^2 to
    // the objective, where d_i is the distance of variable i from
    // prox_center[i] in internally rescaled unit-box coordinates. Standard
    // stabilization for degenerate or multi-branch problems: it selects the
    // solution nearest the center instead of an arbitrary one, and leaves a
    // solve whose answer equals the center unbiased. Empty vectors disable it;
    // prox_center is given in raw variable coordinates.
    Vec prox_weight;
    Vec prox_center;
};

/// One scalarized subproblem over the variable vector v.
struct NlpInstance {
    int dim = 0;
    std::function<double(const Vec&)> objective;
    std::vector<std::function<double(const Vec&)>> eq_constraints;    // target 0
    std::vector<std::function<double(const Vec&)>> ineq_constraints;  // feasible <= 0
    Vec lower, upper;
};

enum class NlpStatus { converged, max_iterations, infeasible, numerical_failure };

inline std::string to_string(NlpStatus s) {
    switch (s) {
        case NlpStatus::converged: return "converged";
        case NlpStatus::max_iterations: return "max-iterations";
        case NlpStatus::infeasible: return "infeasible";
        case NlpStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

struct NlpResult {
    Vec v_star;
    double objective_value = 0.0;
    double max_eq_violation = 0.0;
    double max_ineq_violation = 0.0;
    NlpStatus status = NlpStatus::numerical_failure;
    long long fe_used = 0;  // evaluation points probed during this solve
};

/// Multiplier and penalty state of the augmented Lagrangian. Persisting it
/// across repeated solves of a slowly changing instance (warm duals) lets a
/// re-solve converge in very few iterations.
struct DualState {
    Vec kappa;   // equality multipliers
    Vec lam;     // inequality multipliers (>= 0)
    double mu = 0.0;  // penalty parameter; 0 requests penalty_init
};

namespace detail {

// Set while the solver probes finite-difference points, so evaluation
// wrappers can attribute those calls to FD overhead.
inline thread_local bool in_fd_probe = false;

struct FdProbeGuard {
    FdProbeGuard() { in_fd_probe = true; }
    ~FdProbeGuard() { in_fd_probe = false; }
};

}  // namespace detail

/// Finite-difference gradient of a scalar function, per component i:
/// forward (f(x+h e_i) - f(x))/h, central (f(x+h e_i) - f(x-h e_i))/(2h).
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       const SolverOptions& opts) {
    const double h = opts.fd_step;
    Vec g(x.size());
    detail::FdProbeGuard guard;
    const double f0 = opts.fd_scheme == FdScheme::forward
                          ? f(x)
                          : std::numeric_limits<double>::quiet_NaN();
    if (opts.fd_scheme == FdScheme::forward && !std::isfinite(f0))
        throw gradient_error("non-finite value at base point");
    Vec probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (opts.fd_scheme == FdScheme::forward) {
            probe[i] = x[i] + h;
            const double fp = f(probe);
            if (!std::isfinite(fp))
                throw gradient_error("non-finite value at probe of component " +
                                     std::to_string(i));
            g[i] = (fp - f0) / h;
        } else {
            probe[i] = x[i] + h;
            const double fp = f(probe);
            probe[i] = x[i] - h;
            const double fm = f(probe);
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw gradient_error("non-finite value at probe of component " +
                                     std::to_string(i));
            g[i] = (fp - fm) / (2.0 * h);
        }
        probe[i] = x[i];
    }
    return g;
}

namespace detail {

struct RawEval {
    double f = 0.0;
    Vec h, g;
    bool finite = false;
};

class AugLag {
public:
    AugLag(const NlpInstance& inst, const SolverOptions& opts, const DualState* warm)
        : inst_(inst) {
        const std::size_t ne = inst.eq_constraints.size();
        const std::size_t ni = inst.ineq_constraints.size();
        if (warm && warm->kappa.size() == ne && warm->lam.size() == ni && warm->mu > 0.0) {
            kappa_ = warm->kappa;
            lam_ = warm->lam;
            // Re-seeding at a very stiff penalty makes the first inner
            // minimization needlessly hard when the instance has shifted;
            // the schedule re-grows the penalty quickly if it is needed.
            mu_ = std::clamp(warm->mu, opts.penalty_init, 1e3);
        } else {
            kappa_.assign(ne, 0.0);
            lam_.assign(ni, 0.0);
            mu_ = opts.penalty_init;
        }
    }

    RawEval eval(const Vec& v) {
        RawEval r;
        r.f = inst_.objective(v);
        ++fe_;
        r.h.resize(inst_.eq_constraints.size());
        for (std::size_t i = 0; i < r.h.size(); ++i) r.h[i] = inst_.eq_constraints[i](v);
        r.g.resize(inst_.ineq_constraints.size());
        for (std::size_t i = 0; i < r.g.size(); ++i) r.g[i] = inst_.ineq_constraints[i](v);
        r.finite = std::isfinite(r.f) && all_finite(r.h) && all_finite(r.g);
        return r;
    }

    double value(const RawEval& r) const {
        if (!r.finite) return std::numeric_limits<double>::infinity();
        double L = r.f;
        for (std::size_t i = 0; i < r.h.size(); ++i)
            L += kappa_[i] * r.h[i] + 0.5 * mu_ * r.h[i] * r.h[i];
        for (std::size_t j = 0; j < r.g.size(); ++j) {
            const double t = lam_[j] + mu_ * r.g[j];
            L += (t > 0.0 ? t * t - lam_[j] * lam_[j] : -lam_[j] * lam_[j]) / (2.0 * mu_);
        }
        return L;
    }

    double value_at(const Vec& v) { return value(eval(v)); }

    // KKT progress measure. Equalities contribute |h_i|. Inequalities use the
    // complementarity residual |max(g_j, -lam_j/mu)|: plain max(0, g_j)
    // vanishes anywhere in the feasible region, so a point that drifted to
    // the feasible side of an active constraint (stationary for the current,
    // still-inaccurate multiplier) would pass a feasibility-only test.
    double violation(const RawEval& r) const {
        double s = 0.0;
        for (double h : r.h) s = std::max(s, std::abs(h));
        for (std::size_t j = 0; j < r.g.size(); ++j)
            s = std::max(s, std::abs(std::max(r.g[j], -lam_[j] / mu_)));
        return s;
    }

    void update_multipliers(const RawEval& r) {
        for (std::size_t i = 0; i < r.h.size(); ++i) kappa_[i] += mu_ * r.h[i];
        for (std::size_t j = 0; j < r.g.size(); ++j)
            lam_[j] = std::max(0.0, lam_[j] + mu_ * r.g[j]);
    }

    void grow_penalty(double factor) { mu_ *= factor; }

    double mu() const { return mu_; }
    long long fe() const { return fe_; }
    DualState duals() const { return DualState{kappa_, lam_, mu_}; }

private:
    const NlpInstance& inst_;
    Vec kappa_, lam_;
    double mu_ = 0.0;
    long long fe_ = 0;
};

// Box-respecting FD gradient of the augmented Lagrangian; probes never
// leave the feasible box (backward step at an upper bound and vice versa).
inline Vec al_gradient(AugLag& al, const NlpInstance& inst, const Vec& v, double f_v,
                       FdScheme scheme, double h) {
    FdProbeGuard guard;
    Vec g(v.size());
    Vec probe = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (scheme == FdScheme::forward) {
            if (v[i] + h <= inst.upper[i]) {
                probe[i] = v[i] + h;
                g[i] = (al.value_at(probe) - f_v) / h;
            } else {
                probe[i] = v[i] - h;
                g[i] = (f_v - al.value_at(probe)) / h;
            }
        } else {
            const double up = std::min(v[i] + h, inst.upper[i]);
            const double dn = std::max(v[i] - h, inst.lower[i]);
            if (up - dn <= 0.0) {
                g[i] = 0.0;
                continue;
            }
            probe[i] = up;
            const double fp = al.value_at(probe);
            probe[i] = dn;
            const double fm = al.value_at(probe);
            g[i] = (fp - fm) / (up - dn);
        }
        probe[i] = v[i];
    }
    return g;
}

}  // namespace detail

/// Local solve of an equality/inequality/box constrained problem:
/// augmented-Lagrangian outer loop around a projected quasi-Newton inner
/// minimizer with finite-difference gradients. Deterministic. `warm`, when
/// given, seeds the multipliers/penalty and receives the final ones back.
inline NlpResult solve_nlp(const NlpInstance& inst_in, Vec v0, const SolverOptions& opts,
                           DualState* warm = nullptr) {
    using detail::AugLag;
    using detail::RawEval;
    const int dim = inst_in.dim;

    // Internally rescale box-bounded variables to the unit box. Mixed
    // variable ranges (designs spanning decades next to weights in [0, 1])
    // otherwise cripple the quasi-Newton model and the relative accuracy of
    // the finite-difference step.
    Vec shift(dim, 0.0), scale(dim, 1.0);
    for (int i = 0; i < dim; ++i) {
        const double lo = inst_in.lower[i], hi = inst_in.upper[i];
        if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) {
            shift[i] = lo;
            scale[i] = hi - lo;
        }
    }
    const auto to_raw = [&shift, &scale, dim](const Vec& u) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = shift[i] + scale[i] * u[i];
        return x;
    };
    NlpInstance inst;
    inst.dim = dim;
    inst.lower.resize(dim);
    inst.upper.resize(dim);
    for (int i = 0; i < dim; ++i) {
        inst.lower[i] = (inst_in.lower[i] - shift[i]) / scale[i];
        inst.upper[i] = (inst_in.upper[i] - shift[i]) / scale[i];
    }
    const bool use_prox = opts.prox_weight.size() == static_cast<std::size_t>(dim) &&
                          opts.prox_center.size() == static_cast<std::size_t>(dim);
    Vec prox_center_scaled;
    if (use_prox) {
        prox_center_scaled.resize(dim);
        for (int i = 0; i < dim; ++i)
            prox_center_scaled[i] = (opts.prox_center[i] - shift[i]) / scale[i];
    }
    inst.objective = [&inst_in, &to_raw, &opts, use_prox, prox_center_scaled](const Vec& u) {
        double val = inst_in.objective(to_raw(u));
        if (use_prox) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (opts.prox_weight[i] <= 0.0) continue;
                const double d = u[i] - prox_center_scaled[i];
                val += 0.5 * opts.prox_weight[i] * d * d;
            }
        }
        return val;
    };
    for (const auto& c : inst_in.eq_constraints)
        inst.eq_constraints.push_back([&c, &to_raw](const Vec& u) { return c(to_raw(u)); });
    for (const auto& c : inst_in.ineq_constraints)
        inst.ineq_constraints.push_back([&c, &to_raw](const Vec& u) { return c(to_raw(u)); });

    for (int i = 0; i < dim; ++i) v0[i] = (v0[i] - shift[i]) / scale[i];
    Vec v = clamped(std::move(v0), inst.lower, inst.upper);

    AugLag al(inst, opts, warm);
    RawEval r = al.eval(v);
    NlpResult result;
    auto finish = [&](NlpStatus status) {
        result.v_star = to_raw(v);
        result.objective_value = r.f;
        double veq = 0.0, vineq = 0.0;
        for (double h : r.h) veq = std::max(veq, std::abs(h));
        for (double g : r.g) vineq = std::max(vineq, g);
        result.max_eq_violation = veq;
        result.max_ineq_violation = vineq;
        result.status = status;
        result.fe_used = al.fe();
        if (warm) *warm = al.duals();
        return result;
    };
    if (!r.finite) return finish(NlpStatus::numerical_failure);

    double fal = al.value(r);
    int total_inner = 0;
    // Forward differences are half the probing cost but carry an O(h) bias;
    // they are used while the target tolerance is loose and replaced by
    // central differences for the tight final stages.
    const double central_cut = std::sqrt(opts.fd_step);

    const double bound_eps = 1e-12;
    auto active_mask = [&](const Vec& grad) {
        std::vector<char> a(dim, 0);
        for (int i = 0; i < dim; ++i) {
            if ((v[i] <= inst.lower[i] + bound_eps * (1.0 + std::abs(inst.lower[i])) &&
                 grad[i] > 0.0) ||
                (v[i] >= inst.upper[i] - bound_eps * (1.0 + std::abs(inst.upper[i])) &&
                 grad[i] < 0.0))
                a[i] = 1;
        }
        return a;
    };

    // Inner loop state: dense inverse-Hessian approximation, kept across
    // outer iterations (multiplier updates perturb the model only mildly).
    std::vector<double> H;
    auto reset_H = [&] {
        H.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        for (int i = 0; i < dim; ++i) H[static_cast<std::size_t>(i) * dim + i] = 1.0;
    };
    reset_H();

    struct InnerResult {
        double pg_norm = std::numeric_limits<double>::infinity();
        bool stalled = false;
        bool bad_numerics = false;
    };

    // Minimize the current augmented Lagrangian until the projected gradient
    // drops below omega, the per-call iteration cap is hit, or progress stops.
    auto inner = [&](double omega, int iter_cap) -> InnerResult {
        InnerResult out;
        FdScheme scheme = (opts.fd_scheme == FdScheme::central || omega <= central_cut)
                              ? FdScheme::central
                              : FdScheme::forward;
        Vec grad = detail::al_gradient(al, inst, v, fal, scheme, opts.fd_step);
        if (!all_finite(grad)) {
            out.bad_numerics = true;
            return out;
        }
        std::vector<char> active = active_mask(grad);
        Vec gm(dim), d(dim), s(dim), y(dim);
        int iters_here = 0;
        while (true) {
            for (int i = 0; i < dim; ++i) gm[i] = active[i] ? 0.0 : grad[i];
            out.pg_norm = norm_inf(gm);
            if (out.pg_norm <= omega) {
                // Forward differences carry an O(h) bias; confirm apparent
                // stationarity with one central-difference pass.
                if (scheme == FdScheme::forward) {
                    scheme = FdScheme::central;
                    grad = detail::al_gradient(al, inst, v, fal, scheme, opts.fd_step);
                    if (!all_finite(grad)) {
                        out.bad_numerics = true;
                        return out;
                    }
                    active = active_mask(grad);
                    continue;
                }
                return out;
            }
            if (total_inner >= opts.max_iters || iters_here >= iter_cap) return out;
            ++total_inner;
            ++iters_here;

            // d = -H * gm, restricted to the free variables.
            bool steepest = false;
            for (int i = 0; i < dim; ++i) {
                double acc = 0.0;
                for (int j = 0; j < dim; ++j)
                    acc += H[static_cast<std::size_t>(i) * dim + j] * gm[j];
                d[i] = active[i] ? 0.0 : -acc;
            }
            if (dot(d, gm) > -1e-14 * (1.0 + norm(d) * norm(gm))) {
                reset_H();
                for (int i = 0; i < dim; ++i) d[i] = active[i] ? 0.0 : -gm[i];
                steepest = true;
            }

            // Backtracking line search with projection onto the box.
            bool accepted = false;
            Vec vt;
            RawEval rt;
            double ft = 0.0;
            for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
                // Variables live in the unit box; cap the first trial step
                // so an overlong direction doesn't burn halvings.
                double t = std::min(1.0, 0.5 / std::max(1e-300, norm_inf(d)));
                for (int ls = 0; ls < 30; ++ls) {
                    vt = v;
                    for (int i = 0; i < dim; ++i) vt[i] += t * d[i];
                    vt = clamped(std::move(vt), inst.lower, inst.upper);
                    double step = 0.0, descent = 0.0;
                    for (int i = 0; i < dim; ++i) {
                        step = std::max(step, std::abs(vt[i] - v[i]));
                        descent += grad[i] * (vt[i] - v[i]);
                    }
                    if (step <= 1e-16 * (1.0 + norm_inf(v))) break;
                    rt = al.eval(vt);
                    ft = al.value(rt);
                    if (std::isfinite(ft) &&
                        ((descent < 0.0 && ft <= fal + 1e-4 * descent) ||
                         (descent >= 0.0 && ft < fal))) {
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!accepted && !steepest) {
                    reset_H();
                    for (int i = 0; i < dim; ++i) d[i] = active[i] ? 0.0 : -gm[i];
                    steepest = true;
                } else {
                    break;
                }
            }
            if (!accepted) {
                if (scheme == FdScheme::forward) {
                    scheme = FdScheme::central;
                    grad = detail::al_gradient(al, inst, v, fal, scheme, opts.fd_step);
                    if (!all_finite(grad)) {
                        out.bad_numerics = true;
                        return out;
                    }
                    active = active_mask(grad);
                    continue;
                }
                out.stalled = true;
                return out;
            }

            Vec grad_new = detail::al_gradient(al, inst, vt, ft, scheme, opts.fd_step);
            if (!all_finite(grad_new)) {
                out.bad_numerics = true;
                return out;
            }
            std::vector<char> active_new = active_mask(grad_new);
            for (int i = 0; i < dim; ++i) {
                s[i] = vt[i] - v[i];
                y[i] = (active_new[i] ? 0.0 : grad_new[i]) - gm[i];
            }
            const double sy = dot(s, y);
            if (sy > 1e-12 * norm(s) * norm(y)) {
                const double rho = 1.0 / sy;
                Vec Hy(dim, 0.0);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        Hy[i] += H[static_cast<std::size_t>(i) * dim + j] * y[j];
                const double yHy = dot(y, Hy);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        H[static_cast<std::size_t>(i) * dim + j] +=
                            -rho * (s[i] * Hy[j] + Hy[i] * s[j]) +
                            rho * (1.0 + rho * yHy) * s[i] * s[j];
            }
            v = std::move(vt);
            r = rt;
            fal = ft;
            grad = std::move(grad_new);
            active = std::move(active_new);
        }
    };

    // Classic augmented-Lagrangian forcing sequences: solve the subproblem
    // to tolerance omega_k, accept a multiplier update when the violation
    // beats eta_k, otherwise raise the penalty.
    double omega = std::max(opts.opt_tol, 1.0 / al.mu());
    double eta = std::max(opts.feas_tol, 1.0 / std::pow(al.mu(), 0.1));
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        const int cap = std::max(8, opts.max_iters / 4);
        const InnerResult ir = inner(omega, cap);
        if (ir.bad_numerics) return finish(NlpStatus::numerical_failure);
        const double viol = al.violation(r);
#ifdef EF_TRACE
        std::fprintf(stderr,
                     "  outer=%d mu=%.1e omega=%.1e eta=%.1e viol=%.2e pg=%.2e "
                     "stalled=%d inner_total=%d fe=%lld\n",
                     outer, al.mu(), omega, eta, viol, ir.pg_norm, (int)ir.stalled,
                     total_inner, al.fe());
#endif
        if (viol <= opts.feas_tol && (ir.pg_norm <= opts.opt_tol || ir.stalled))
            return finish(NlpStatus::converged);
        if (total_inner >= opts.max_iters)
            return finish(viol <= opts.feas_tol ? NlpStatus::max_iterations
                                                : NlpStatus::infeasible);
        if (viol <= eta) {
            al.update_multipliers(r);
            omega = std::max(opts.opt_tol, omega / al.mu());
            eta = std::max(opts.feas_tol, eta / std::pow(al.mu(), 0.9));
        } else {
            al.grow_penalty(opts.penalty_growth);
            reset_H();  // the model curvature changed substantially
            omega = std::max(opts.opt_tol, 1.0 / al.mu());
            eta = std::max(opts.feas_tol, 1.0 / std::pow(al.mu(), 0.1));
        }
        fal = al.value(r);  // multipliers or penalty changed
    }
    const double viol = al.violation(r);
    return finish(viol <= opts.feas_tol ? NlpStatus::max_iterations : NlpStatus::infeasible);
}

}  // namespace evenfront
