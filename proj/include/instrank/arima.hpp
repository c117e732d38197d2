#pragma once

#include "instrank/error.hpp"
#include "instrank/optimize.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace instrank {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    friend auto operator<=>(const ArimaOrder&, const ArimaOrder&) = default;

    std::string str() const {
        return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
    }
};

/// Candidate orders tried for every series unless configured otherwise.
inline const std::vector<ArimaOrder>& default_arima_orders() {
    static const std::vector<ArimaOrder> orders{{1, 1, 1}, {1, 1, 0}, {0, 1, 1}};
    return orders;
}

struct ArimaFit {
    ArimaOrder order;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double constant = 0.0;
    /// Implied mean of the differenced process, c / (1 - sum(ar)).
    double mean = 0.0;
    /// One-step residuals of the differenced series, starting at index p.
    std::vector<double> residuals;
    double rmse = 0.0;
};

struct ArimaOptions {
    double coeff_bound = 0.999;
    std::size_t max_iterations = 500;
};

inline std::vector<double> difference(std::span<const double> y, int d) {
    std::vector<double> w(y.begin(), y.end());
    for (int k = 0; k < d; ++k) {
        if (w.empty()) break;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
        w.pop_back();
    }
    return w;
}

namespace detail {

/// Residual recursion with a free constant: eps_t = a_t + c * g_t. Returns
/// the CSS-optimal c for the given AR/MA coefficients and fills `eps`.
inline double css_residuals(std::span<const double> w, std::span<const double> ar, std::span<const double> ma,
                            std::vector<double>& eps) {
    const std::size_t p = ar.size(), q = ma.size(), n = w.size();
    std::vector<double> a(n, 0.0), g(n, 0.0);
    double ag = 0.0, gg = 0.0;
    for (std::size_t t = p; t < n; ++t) {
        double at = w[t], gt = -1.0;
        for (std::size_t i = 0; i < p; ++i) at -= ar[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) {
            if (t < p + 1 + j) break;
            at -= ma[j] * a[t - 1 - j];
            gt -= ma[j] * g[t - 1 - j];
        }
        a[t] = at;
        g[t] = gt;
        ag += at * gt;
        gg += gt * gt;
    }
    const double c = gg > 0.0 ? -ag / gg : 0.0;
    eps.assign(n - p, 0.0);
    for (std::size_t t = p; t < n; ++t) eps[t - p] = a[t] + c * g[t];
    return c;
}

inline double sum_squares(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace detail

/// Conditional sum of squares of the one-step residuals for fixed
/// coefficients and constant on an already differenced series.
inline double css_objective(std::span<const double> w, std::span<const double> ar, std::span<const double> ma,
                            double constant) {
    const std::size_t p = ar.size(), q = ma.size();
    std::vector<double> eps(w.size(), 0.0);
    double css = 0.0;
    for (std::size_t t = p; t < w.size(); ++t) {
        double pred = constant;
        for (std::size_t i = 0; i < p; ++i) pred += ar[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j)
            if (t >= p + 1 + j) pred += ma[j] * eps[t - 1 - j];
        eps[t] = w[t] - pred;
        css += eps[t] * eps[t];
    }
    return css;
}

/// Fits ARIMA(p,d,q) by conditional sum of squares. The constant is solved in
/// closed form for every coefficient vector; AR/MA coefficients are searched
/// by Nelder-Mead inside (-bound, bound), started from the best point of a
/// coarse grid.
inline ArimaFit fit_arima(std::span<const double> series, ArimaOrder order, const ArimaOptions& opts = {}) {
    if (order.p < 0 || order.p > 1 || order.d < 0 || order.d > 1 || order.q < 0 || order.q > 1)
        throw Error(ErrorKind::InvalidArgument, "unsupported ARIMA order " + order.str());
    const auto w = difference(series, order.d);
    const std::size_t p = static_cast<std::size_t>(order.p), q = static_cast<std::size_t>(order.q);
    if (series.size() <= static_cast<std::size_t>(order.d) || w.size() < p + q + 3)
        throw Error(ErrorKind::SeriesTooShort, "ARIMA" + order.str() + " needs at least " +
                                                   std::to_string(p + q + 3 + static_cast<std::size_t>(order.d)) +
                                                   " points, got " + std::to_string(series.size()));

    std::vector<double> eps;
    auto objective = [&](const std::vector<double>& x) {
        std::span<const double> ar(x.data(), p), ma(x.data() + p, q);
        detail::css_residuals(w, ar, ma, eps);
        double css = detail::sum_squares(eps);
        return std::isfinite(css) ? css : std::numeric_limits<double>::infinity();
    };

    const optimize::Box box{-opts.coeff_bound, opts.coeff_bound};
    std::vector<double> start(p + q, 0.0);
    if (p + q > 0) {
        static constexpr double kGrid[] = {-0.8, -0.4, 0.0, 0.4, 0.8};
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> x(p + q);
        std::size_t cells = 1;
        for (std::size_t k = 0; k < p + q; ++k) cells *= std::size(kGrid);
        for (std::size_t cell = 0; cell < cells; ++cell) {
            std::size_t rest = cell;
            for (std::size_t k = 0; k < p + q; ++k) {
                x[k] = kGrid[rest % std::size(kGrid)];
                rest /= std::size(kGrid);
            }
            double v = objective(x);
            if (v < best) {
                best = v;
                start = x;
            }
        }
    }

    optimize::NelderMeadOptions nm;
    nm.max_iterations = opts.max_iterations;
    auto result = optimize::nelder_mead(objective, start, box, nm);
    if (p + q > 0) {
        // restart from the optimum to escape a prematurely collapsed simplex
        auto again = optimize::nelder_mead(objective, result.x, box, nm);
        if (again.value <= result.value) result = again;
    }
    if (!result.converged || !std::isfinite(result.value))
        throw Error(ErrorKind::FitDiverged, "ARIMA" + order.str() + " did not converge in " +
                                                std::to_string(opts.max_iterations) + " iterations");

    ArimaFit fit;
    fit.order = order;
    fit.ar_coeffs.assign(result.x.begin(), result.x.begin() + static_cast<std::ptrdiff_t>(p));
    fit.ma_coeffs.assign(result.x.begin() + static_cast<std::ptrdiff_t>(p), result.x.end());
    fit.constant = detail::css_residuals(w, fit.ar_coeffs, fit.ma_coeffs, fit.residuals);
    double ar_sum = 0.0;
    for (double a : fit.ar_coeffs) ar_sum += a;
    fit.mean = fit.constant / (1.0 - ar_sum);
    fit.rmse = fit.residuals.empty() ? 0.0
                                     : std::sqrt(detail::sum_squares(fit.residuals) /
                                                 static_cast<double>(fit.residuals.size()));
    return fit;
}

/// One-step-ahead forecast on the original scale for the series `fit` was
/// estimated on.
inline double arima_predict_next(const ArimaFit& fit, std::span<const double> series) {
    const auto w = difference(series, fit.order.d);
    const std::size_t n = w.size(), p = fit.ar_coeffs.size();
    double next = fit.constant;
    for (std::size_t i = 0; i < p; ++i) next += fit.ar_coeffs[i] * w[n - 1 - i];
    for (std::size_t j = 0; j < fit.ma_coeffs.size(); ++j) {
        std::size_t t = n - 1 - j;  // residual index in w coordinates
        if (t >= p) next += fit.ma_coeffs[j] * fit.residuals[t - p];
    }
    if (fit.order.d == 1) next += series.back();
    return next;
}

}  // namespace instrank
