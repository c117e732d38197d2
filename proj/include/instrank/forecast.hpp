#pragma once

#include "instrank/arima.hpp"
#include "instrank/error.hpp"
#include "instrank/relscore.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace instrank {

enum class ModelKind { NaiveES, SimpleES, Arima, Last3Avg };

constexpr std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::NaiveES: return "naive";
    case ModelKind::SimpleES: return "es";
    case ModelKind::Arima: return "arima";
    case ModelKind::Last3Avg: return "last3";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view name) {
    if (name == "naive" || name == "naive-es") return ModelKind::NaiveES;
    if (name == "es" || name == "simple-es") return ModelKind::SimpleES;
    if (name == "arima") return ModelKind::Arima;
    if (name == "last3" || name == "last3-avg") return ModelKind::Last3Avg;
    throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

struct ModelSpec {
    ModelKind kind = ModelKind::NaiveES;
    std::optional<double> alpha;
    std::vector<ArimaOrder> candidate_orders;

    static ModelSpec naive() { return {ModelKind::NaiveES, std::nullopt, {}}; }
    static ModelSpec simple(double alpha) { return {ModelKind::SimpleES, alpha, {}}; }
    static ModelSpec last3() { return {ModelKind::Last3Avg, std::nullopt, {}}; }
    static ModelSpec arima(std::vector<ArimaOrder> orders = default_arima_orders()) {
        return {ModelKind::Arima, std::nullopt, std::move(orders)};
    }

    void validate() const {
        if (kind == ModelKind::SimpleES && (!alpha || !(*alpha > 0.0 && *alpha <= 1.0)))
            throw Error(ErrorKind::InvalidAlpha, "simple exponential smoothing needs alpha in (0,1]");
        if (kind == ModelKind::Arima && candidate_orders.empty())
            throw Error(ErrorKind::InvalidArgument, "ARIMA needs at least one candidate order");
    }

    std::string describe() const {
        std::string out(to_string(kind));
        if (kind == ModelKind::SimpleES && alpha) out += "(alpha=" + tsv::fixed(*alpha, 4) + ")";
        if (kind == ModelKind::Arima) {
            out += "[";
            for (std::size_t i = 0; i < candidate_orders.size(); ++i)
                out += (i ? " " : "") + candidate_orders[i].str();
            out += "]";
        }
        return out;
    }
};

namespace detail {
inline void require_nonempty(std::span<const double> y) {
    if (y.empty()) throw Error(ErrorKind::EmptySeries, "cannot forecast an empty series");
}
}  // namespace detail

/// sum_i y_i / e^(t-i): every step back in time divides the weight by e.
inline double naive_es_forecast(std::span<const double> y) {
    detail::require_nonempty(y);
    double acc = 0.0;
    for (double v : y) acc = acc / std::numbers::e + v;
    return acc;
}

/// Smoothed level after the last observation, seeded with the first one.
inline double simple_es_forecast(std::span<const double> y, double alpha) {
    detail::require_nonempty(y);
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error(ErrorKind::InvalidAlpha, "alpha must lie in (0,1], got " + std::to_string(alpha));
    double level = y.front();
    for (std::size_t t = 1; t < y.size(); ++t) level = alpha * y[t] + (1.0 - alpha) * level;
    return level;
}

inline double last3_avg_forecast(std::span<const double> y) {
    detail::require_nonempty(y);
    const std::size_t k = std::min<std::size_t>(3, y.size());
    double sum = 0.0;
    for (std::size_t i = y.size() - k; i < y.size(); ++i) sum += y[i];
    return sum / static_cast<double>(k);
}

struct ArimaForecast {
    double value = 0.0;
    std::optional<ArimaOrder> selected;  // empty when the average fallback was used
    double holdout_rmse = 0.0;

    bool fell_back() const { return !selected.has_value(); }
};

/// Held-out RMSE of rolling-origin one-step forecasts over the last `window`
/// points. Throws whatever fit_arima throws on any origin.
inline double arima_holdout_rmse(std::span<const double> y, ArimaOrder order, std::size_t window,
                                 const ArimaOptions& opts = {}) {
    double sq = 0.0;
    for (std::size_t origin = y.size() - window; origin < y.size(); ++origin) {
        auto train = y.first(origin);
        auto fit = fit_arima(train, order, opts);
        double err = y[origin] - arima_predict_next(fit, train);
        sq += err * err;
    }
    return std::sqrt(sq / static_cast<double>(window));
}

/// Picks the candidate order with the lowest held-out RMSE on the last
/// min(3, t-4) points and forecasts with it, clamped at zero. Constant series,
/// series too short for any origin and series where no candidate fits all
/// fall back to the last-three average.
inline ArimaForecast arima_forecast(std::span<const double> y, std::span<const ArimaOrder> candidates,
                                    const ArimaOptions& opts = {}) {
    detail::require_nonempty(y);
    if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate ARIMA orders");

    ArimaForecast out;
    out.value = last3_avg_forecast(y);
    const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    if (constant || y.size() < 5) return out;
    const std::size_t window = std::min<std::size_t>(3, y.size() - 4);

    std::optional<ArimaOrder> best;
    double best_rmse = 0.0;
    for (const auto& order : candidates) {
        try {
            double rmse = arima_holdout_rmse(y, order, window, opts);
            if (!std::isfinite(rmse)) continue;
            if (!best || rmse < best_rmse) {
                best = order;
                best_rmse = rmse;
            }
        } catch (const Error&) {
            // candidate ineligible on this series
        }
    }
    if (!best) return out;
    try {
        auto fit = fit_arima(y, *best, opts);
        out.value = std::max(0.0, arima_predict_next(fit, y));
        out.selected = best;
        out.holdout_rmse = best_rmse;
    } catch (const Error&) {
    }
    return out;
}

struct ForecastOutcome {
    double value = 0.0;
    bool fallback = false;
};

/// Applies the configured forecaster to one series, unclamped except for the
/// ARIMA path, which clamps internally.
inline ForecastOutcome forecast(const ModelSpec& spec, std::span<const double> y) {
    switch (spec.kind) {
    case ModelKind::NaiveES: return {naive_es_forecast(y), false};
    case ModelKind::SimpleES: return {simple_es_forecast(y, spec.alpha.value_or(0.0)), false};
    case ModelKind::Last3Avg: return {last3_avg_forecast(y), false};
    case ModelKind::Arima: {
        auto r = arima_forecast(y, spec.candidate_orders);
        return {r.value, r.fell_back()};
    }
    }
    return {};
}

struct RankingEntry {
    std::string affiliation_id;
    double score = 0.0;

    friend bool operator==(const RankingEntry&, const RankingEntry&) = default;
};

struct Ranking {
    std::string conference_id;
    int year = 0;
    std::vector<RankingEntry> entries;

    /// Score descending, affiliation ascending.
    void sort() {
        std::sort(entries.begin(), entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.affiliation_id < b.affiliation_id;
        });
    }
};

struct RankDiagnostics {
    std::size_t series = 0;
    /// Series answered by the last-three average instead of the chosen model.
    std::size_t fallbacks = 0;
    /// Series where even the fallback failed; they are ranked with score 0.
    std::size_t failures = 0;
};

/// Forecasts every series for `year` and orders affiliations by the
/// forecast. Every series must end at year - 1.
inline Ranking rank_affiliations(std::span<const RelScoreSeries> series_set, const ModelSpec& spec, int year,
                                 RankDiagnostics* diagnostics = nullptr) {
    spec.validate();
    Ranking ranking;
    ranking.year = year;
    if (!series_set.empty()) ranking.conference_id = series_set.front().conference_id;

    RankDiagnostics diag;
    std::optional<Error> first_error;
    for (const auto& s : series_set) {
        if (!s.values.empty() && s.last_year() != year - 1)
            throw Error(ErrorKind::InvalidArgument, "series for '" + s.affiliation_id + "' ends in " +
                                                        std::to_string(s.last_year()) + ", expected " +
                                                        std::to_string(year - 1));
        ++diag.series;
        double score = 0.0;
        try {
            auto r = forecast(spec, s.values);
            score = r.value;
            if (r.fallback) ++diag.fallbacks;
        } catch (const Error& e) {
            if (!first_error) first_error = e;
            try {
                score = last3_avg_forecast(s.values);
                ++diag.fallbacks;
            } catch (const Error&) {
                ++diag.failures;
            }
        }
        ranking.entries.push_back({s.affiliation_id, std::max(0.0, score)});
    }
    if (first_error && diag.failures == diag.series) throw *first_error;
    ranking.sort();
    if (diagnostics) *diagnostics = diag;
    return ranking;
}

/// Contest prediction file: conference_id, affiliation_id, score (6 decimals).
inline void write_prediction(std::ostream& out, const Ranking& ranking) {
    for (const auto& e : ranking.entries)
        out << ranking.conference_id << '\t' << e.affiliation_id << '\t' << tsv::fixed(e.score, 6) << '\n';
}

inline void write_prediction(const std::string& path, const Ranking& ranking) {
    auto out = tsv::open_output(path);
    write_prediction(out, ranking);
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

/// Reads a prediction file in file order. Accepts the three-column contest
/// layout and the two-column (affiliation_id, score) layout of network
/// rankings.
inline Ranking read_prediction(const std::string& path) {
    Ranking ranking;
    std::size_t line_no = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++line_no;
        auto f = tsv::split(line);
        if (f.size() != 2 && f.size() != 3)
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
        auto score = tsv::parse_double(f.back());
        const auto aff = f[f.size() - 2];
        if (!score || aff.empty())
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": bad prediction row");
        if (f.size() == 3 && ranking.conference_id.empty()) ranking.conference_id = std::string(f[0]);
        ranking.entries.push_back({std::string(aff), *score});
    });
    return ranking;
}

}  // namespace instrank
