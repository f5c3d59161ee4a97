#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "linalg.hpp"

namespace evenfront {

struct evaluation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct normalization_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A vector minimization problem: min F(x) subject to g(x) <= 0, h(x) = 0
/// and per-variable box bounds.
struct MooProblem {
    std::string name;
    int k = 0;  // objectives
    int n = 0;  // design variables
    int m = 0;  // inequality constraints
    int e = 0;  // equality constraints
    std::function<Vec(const Vec&)> objectives;
    std::function<Vec(const Vec&)> inequalities;  // feasible iff every component <= 0
    std::function<Vec(const Vec&)> equalities;    // feasible iff every component == 0
    Vec lower, upper;
};

/// Counts full objective-vector evaluations, optionally keyed by phase label.
/// Safe to increment from concurrent solver workers.
class EvaluationCounter {
public:
    void record(const std::string& phase, long long count = 1) {
        total_.fetch_add(count, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(mutex_);
        per_phase_[phase] += count;
    }

    long long total() const { return total_.load(std::memory_order_relaxed); }

    std::map<std::string, long long> per_phase() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return per_phase_;
    }

private:
    std::atomic<long long> total_{0};
    mutable std::mutex mutex_;
    std::map<std::string, long long> per_phase_;
};

/// Individual-objective minimizers, their objective images (the pay-off
/// matrix) and the utopia/nadir estimates derived from them.
struct AnchorSet {
    std::vector<Vec> minimizers;         // k design vectors
    std::vector<Vec> anchor_objectives;  // k objective vectors F(x_i*)
    Vec utopia;                          // component-wise min of the pay-off rows
    Vec nadir_estimate;                  // component-wise max of the pay-off rows
};

/// Evaluates F(x) through the counting wrapper. x is clamped to the box
/// before evaluation; a non-finite objective component is an error.
inline Vec evaluate_counted(const MooProblem& problem, const Vec& x,
                            EvaluationCounter& counter,
                            const std::string& phase = "eval") {
    const Vec xc = clamped(x, problem.lower, problem.upper);
    Vec f = problem.objectives(xc);
    counter.record(phase);
    for (int i = 0; i < problem.k; ++i) {
        if (!std::isfinite(f[i]))
            throw evaluation_error("non-finite objective " + std::to_string(i) +
                                   " for problem " + problem.name);
    }
    return f;
}

inline void check_normalization_axes(const AnchorSet& anchors, double tol = 1e-12) {
    for (std::size_t i = 0; i < anchors.utopia.size(); ++i) {
        if (anchors.nadir_estimate[i] - anchors.utopia[i] <= tol)
            throw normalization_error("degenerate objective axis " + std::to_string(i) +
                                      ": nadir equals utopia");
    }
}

/// Affine map of an objective vector into [0,1]^k spanned by utopia/nadir.
inline Vec normalize(const Vec& f, const AnchorSet& anchors) {
    check_normalization_axes(anchors);
    Vec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = (f[i] - anchors.utopia[i]) /
                 (anchors.nadir_estimate[i] - anchors.utopia[i]);
    return out;
}

inline Vec denormalize(const Vec& fn, const AnchorSet& anchors) {
    check_normalization_axes(anchors);
    Vec out(fn.size());
    for (std::size_t i = 0; i < fn.size(); ++i)
        out[i] = anchors.utopia[i] +
                 fn[i] * (anchors.nadir_estimate[i] - anchors.utopia[i]);
    return out;
}

}  // namespace evenfront
