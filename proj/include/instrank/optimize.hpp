#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace instrank::optimize {

struct Box {
    double lower;
    double upper;

    double clamp(double x) const { return std::clamp(x, lower, upper); }
};

struct NelderMeadOptions {
    std::size_t max_iterations = 500;
    double initial_step = 0.1;
    double x_tolerance = 1e-10;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free minimisation over a box. Trial points are projected onto
/// the box, so every evaluated point is feasible. Converges when the simplex
/// diameter (max-norm) falls below `x_tolerance`.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, Box box, const NelderMeadOptions& opts = {}) {
    const std::size_t n = start.size();
    for (auto& v : start) v = box.clamp(v);
    if (n == 0) return {start, f(start), 0, true};

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        double step = opts.initial_step;
        if (start[i] + step > box.upper) step = -step;
        simplex[i + 1][i] = box.clamp(start[i] + step);
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    auto point = [&](const std::vector<double>& from, const std::vector<double>& towards, double t) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = box.clamp(from[k] + t * (towards[k] - from[k]));
        return p;
    };

    NelderMeadResult res;
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        if (diameter <= opts.x_tolerance) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

        auto reflected = point(simplex[worst], centroid, 2.0);
        double fr = f(reflected);
        if (fr < fv[best]) {
            auto expanded = point(simplex[worst], centroid, 3.0);
            double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = std::move(reflected);
            fv[worst] = fr;
            continue;
        }
        // contraction: outside when the reflection improved on the worst point
        auto contracted = fr < fv[worst] ? point(simplex[worst], centroid, 1.5) : point(simplex[worst], centroid, 0.5);
        double fc = f(contracted);
        if (fc < std::min(fr, fv[worst])) {
            simplex[worst] = std::move(contracted);
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = point(simplex[best], simplex[i], 0.5);
            fv[i] = f(simplex[i]);
        }
    }

    std::size_t best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    if (!res.converged) {
        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        res.converged = diameter <= opts.x_tolerance;
    }
    res.x = simplex[best];
    res.value = fv[best];
    return res;
}

}  // namespace instrank::optimize
