#pragma once

#include "instrank/error.hpp"
#include "instrank/forecast.hpp"
#include "instrank/relscore.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace instrank {

struct GroundTruth {
    std::string conference_id;
    int year = 0;
    std::map<std::string, double> rel_by_affiliation;
};

struct CvReport {
    std::string conference_id;
    std::string model;
    std::map<int, double> per_year_scores;
    double mean_score = 0.0;
};

/// sum_{i=1..min(n,len)} gains[i] / log2(i+1).
inline double dcg_at_n(std::span<const double> gains, std::size_t n) {
    const std::size_t k = std::min(n, gains.size());
    double dcg = 0.0;
    for (std::size_t i = 0; i < k; ++i) dcg += gains[i] / std::log2(static_cast<double>(i) + 2.0);
    return dcg;
}

/// Gains are the truth rel values read in prediction order; affiliations the
/// prediction omits still count in the ideal ordering.
inline double ndcg_at_n(const Ranking& prediction, const GroundTruth& truth, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "cutoff n must be at least 1");
    std::vector<double> ideal;
    ideal.reserve(truth.rel_by_affiliation.size());
    for (const auto& [aff, rel] : truth.rel_by_affiliation)
        if (rel > 0.0) ideal.push_back(rel);
    if (ideal.empty())
        throw Error(ErrorKind::EmptyGroundTruth, "no positive rel score for " + truth.conference_id + " " +
                                                     std::to_string(truth.year));
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    std::vector<double> gains;
    const std::size_t k = std::min(n, prediction.entries.size());
    gains.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto it = truth.rel_by_affiliation.find(prediction.entries[i].affiliation_id);
        gains.push_back(it == truth.rel_by_affiliation.end() ? 0.0 : it->second);
    }
    return dcg_at_n(gains, n) / dcg_at_n(ideal, n);
}

inline GroundTruth truth_from_table(const RelScoreTable& table, const std::string& conference_id, int year) {
    GroundTruth truth{conference_id, year, {}};
    auto lo = table.entries.lower_bound({conference_id, year, ""});
    for (auto it = lo; it != table.entries.end(); ++it) {
        if (it->first.conference_id != conference_id || it->first.year != year) break;
        truth.rel_by_affiliation[it->first.affiliation_id] = it->second;
    }
    if (truth.rel_by_affiliation.empty())
        throw Error(ErrorKind::MissingTruth, "no rel scores for " + conference_id + " " + std::to_string(year));
    return truth;
}

/// Truth file: rel-score TSV, filtered here to one conference-year.
inline GroundTruth read_truth(const std::string& path, const std::string& conference_id, int year) {
    return truth_from_table(read_rel_scores(path), conference_id, year);
}

/// Mean of the scores of the three most recent years in the report.
inline double expected_score(const CvReport& report) {
    if (report.per_year_scores.empty()) throw Error(ErrorKind::InvalidArgument, "report has no per-year scores");
    double sum = 0.0;
    std::size_t k = 0;
    for (auto it = report.per_year_scores.rbegin(); it != report.per_year_scores.rend() && k < 3; ++it, ++k)
        sum += it->second;
    return sum / static_cast<double>(k);
}

/// Phase weights 20/40/40.
inline double overall_contest_score(const std::array<double, 3>& phase_scores) {
    return 0.2 * phase_scores[0] + 0.4 * phase_scores[1] + 0.4 * phase_scores[2];
}

namespace detail {

inline const RelScoreSeries* find_series(std::span<const RelScoreSeries> set, const std::string& aff) {
    for (const auto& s : set)
        if (s.affiliation_id == aff) return &s;
    return nullptr;
}

inline double mean_of(const std::map<int, double>& scores) {
    double sum = 0.0;
    for (const auto& [y, s] : scores) sum += s;
    return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
}

}  // namespace detail

/// Truncates every series to the years before `year`, keeping affiliations
/// with some positive history.
inline std::vector<RelScoreSeries> history_before(std::span<const RelScoreSeries> series_set, int year) {
    std::vector<RelScoreSeries> out;
    for (const auto& s : series_set) {
        if (year - 1 < s.first_year || year - 1 > s.last_year()) continue;
        RelScoreSeries h{s.affiliation_id, s.conference_id, s.first_year, {}};
        h.values.assign(s.values.begin(), s.values.begin() + (year - s.first_year));
        if (std::any_of(h.values.begin(), h.values.end(), [](double v) { return v > 0.0; }))
            out.push_back(std::move(h));
    }
    return out;
}

/// Rolling-origin evaluation: for every target year the model only sees data
/// strictly before it, and the ranking is scored against that year's values.
/// Series must cover every target year.
inline CvReport cross_validate(std::span<const RelScoreSeries> series_set, const ModelSpec& spec,
                               const std::string& conference_id, std::span<const int> years, std::size_t n) {
    spec.validate();
    CvReport report{conference_id, spec.describe(), {}, 0.0};
    std::vector<int> targets(years.begin(), years.end());
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    for (int year : targets) {
        GroundTruth truth{conference_id, year, {}};
        bool covered = !series_set.empty();
        for (const auto& s : series_set) {
            if (year < s.first_year + 1 || year > s.last_year()) {
                covered = false;
                break;
            }
            double v = s.values[static_cast<std::size_t>(year - s.first_year)];
            if (v > 0.0) truth.rel_by_affiliation[s.affiliation_id] = v;
        }
        if (!covered)
            throw Error(ErrorKind::MissingTruth, "series do not cover history and truth for " + std::to_string(year));
        auto history = history_before(series_set, year);
        auto ranking = rank_affiliations(history, spec, year);
        ranking.conference_id = conference_id;
        report.per_year_scores[year] = ndcg_at_n(ranking, truth, n);
    }
    report.mean_score = detail::mean_of(report.per_year_scores);
    return report;
}

/// Builds the series from a rel-score table over the conference's whole
/// history, then cross-validates.
inline CvReport cross_validate(const RelScoreTable& table, const ModelSpec& spec, const std::string& conference_id,
                               std::span<const int> years, std::size_t n) {
    auto span = conference_years(table, conference_id);
    if (!span) throw Error(ErrorKind::MissingTruth, "no rel scores for conference " + conference_id);
    int last = span->second;
    for (int y : years)
        if (y > last) throw Error(ErrorKind::MissingTruth, "no truth for " + conference_id + " " + std::to_string(y));
    auto series = build_series_set(table, conference_id, span->first, last);
    return cross_validate(series, spec, conference_id, years, n);
}

struct GridSearchResult {
    double alpha = 0.0;
    CvReport report;
    /// One report per grid value, in ascending alpha order.
    std::vector<std::pair<double, CvReport>> evaluated;
};

/// 0.05, 0.10, ..., 0.95.
inline std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
    return grid;
}

/// Maximises the mean cross-validated NDCG of simple exponential smoothing
/// over `grid`; ties go to the smaller alpha.
template <class SeriesSource>
GridSearchResult grid_search_alpha(const SeriesSource& source, const std::string& conference_id,
                                   std::span<const int> years, std::size_t n, std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "alpha grid is empty");
    std::vector<double> alphas(grid.begin(), grid.end());
    for (double a : alphas)
        if (!(a > 0.0 && a <= 1.0)) throw Error(ErrorKind::InvalidAlpha, "grid value outside (0,1]");
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    GridSearchResult result;
    for (double a : alphas) {
        auto report = cross_validate(source, ModelSpec::simple(a), conference_id, years, n);
        if (result.evaluated.empty() || report.mean_score > result.report.mean_score) {
            result.alpha = a;
            result.report = report;
        }
        result.evaluated.emplace_back(a, std::move(report));
    }
    return result;
}

/// year<TAB>ndcg rows, then mean<TAB>value.
inline void write_cv_report(std::ostream& out, const CvReport& report) {
    for (const auto& [year, score] : report.per_year_scores) out << year << '\t' << tsv::fixed(score, 6) << '\n';
    out << "mean\t" << tsv::fixed(report.mean_score, 6) << '\n';
}

inline std::string format_cv_table(const CvReport& report, std::size_t n) {
    std::ostringstream out;
    out << "conference " << report.conference_id << "  model " << report.model << '\n';
    out << "year    NDCG@" << n << '\n';
    for (const auto& [year, score] : report.per_year_scores) out << year << "    " << tsv::fixed(score, 4) << '\n';
    out << "mean    " << tsv::fixed(report.mean_score, 4) << '\n';
    return out.str();
}

}  // namespace instrank
