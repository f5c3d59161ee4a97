#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "problem.hpp"

namespace evenfront {

struct lookup_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::vector<std::string> builtin_problem_names() {
    return {"motta1", "motta2", "dtlz2", "biobj-convex"};
}

namespace detail {

// f_i = x_i with the cyclic reciprocal constraints; d = 3 or 4.
inline MooProblem motta_family(const std::string& name, int d) {
    MooProblem p;
    p.name = name;
    p.k = d;
    p.n = d;
    p.m = d;
    p.e = 0;
    p.lower = Vec(d, 0.2);
    p.upper = Vec(d, 10.0);
    p.objectives = [](const Vec& x) { return x; };
    p.inequalities = [d](const Vec& x) {
        Vec g(d);
        for (int j = 0; j < d; ++j) {
            double s = -x[j];
            for (int i = 0; i < d; ++i)
                if (i != j) s += 1.0 / x[i];
            g[j] = s;
        }
        return g;
    };
    return p;
}

}  // namespace detail

inline MooProblem builtin_problem(const std::string& name) {
    if (name == "motta1") return detail::motta_family("motta1", 3);
    if (name == "motta2") return detail::motta_family("motta2", 4);

    if (name == "dtlz2") {
        // Standard three-objective DTLZ2: position variables x1, x2 on the
        // sphere octant, distance variables x3..x10 in g.
        MooProblem p;
        p.name = "dtlz2";
        p.k = 3;
        p.n = 10;
        p.m = 0;
        p.e = 0;
        p.lower = Vec(10, 0.0);
        p.upper = Vec(10, 1.0);
        p.objectives = [](const Vec& x) {
            constexpr double half_pi = std::numbers::pi / 2.0;
            double g = 0.0;
            for (std::size_t i = 2; i < x.size(); ++i)
                g += (x[i] - 0.5) * (x[i] - 0.5);
            const double c1 = std::cos(x[0] * half_pi), s1 = std::sin(x[0] * half_pi);
            const double c2 = std::cos(x[1] * half_pi), s2 = std::sin(x[1] * half_pi);
            return Vec{(1.0 + g) * c1 * c2, (1.0 + g) * c1 * s2, (1.0 + g) * s1};
        };
        return p;
    }

    if (name == "biobj-convex") {
        // Toy problem with an analytic front: F2 = (sqrt(F1) - 2)^2 on x in [0, 2].
        MooProblem p;
        p.name = "biobj-convex";
        p.k = 2;
        p.n = 1;
        p.m = 0;
        p.e = 0;
        p.lower = Vec{-1.0};
        p.upper = Vec{3.0};
        p.objectives = [](const Vec& x) {
            return Vec{x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
        };
        return p;
    }

    std::string valid;
    for (const auto& v : builtin_problem_names()) valid += (valid.empty() ? "" : ", ") + v;
    throw lookup_error("unknown problem '" + name + "' (valid: " + valid + ")");
}

}  // namespace evenfront
