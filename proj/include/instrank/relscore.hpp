#pragma once

#include "instrank/error.hpp"
#include "instrank/ingest.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace instrank {

struct RelScoreKey {
    std::string conference_id;
    int year = 0;
    std::string affiliation_id;

    friend auto operator<=>(const RelScoreKey&, const RelScoreKey&) = default;
};

struct RelScoreTable {
    std::map<RelScoreKey, double> entries;

    double at(const std::string& conference_id, int year, const std::string& affiliation_id) const {
        auto it = entries.find({conference_id, year, affiliation_id});
        return it == entries.end() ? 0.0 : it->second;
    }
};

struct RelScoreSeries {
    std::string affiliation_id;
    std::string conference_id;
    int first_year = 0;
    std::vector<double> values;

    int last_year() const { return first_year + static_cast<int>(values.size()) - 1; }
};

/// Neumaier-compensated accumulator; keeps per-key sums reproducible when a
/// key receives many small fractional votes.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Fractional vote of a single paper: 1/k per author, split evenly over that
/// author's distinct affiliations. `rows` must all belong to the paper.
/// Authors without any affiliation still count towards k.
inline std::map<std::string, double> paper_contributions(std::span<const AuthorAffiliationRecord> rows) {
    std::map<std::string, std::set<std::string>> by_author;
    for (const auto& r : rows) {
        auto& affs = by_author[r.author_id];
        if (!r.affiliation_id.empty()) affs.insert(r.affiliation_id);
    }
    std::map<std::string, double> share;
    if (by_author.empty()) return share;
    const double k = static_cast<double>(by_author.size());
    for (const auto& [author, affs] : by_author) {
        if (affs.empty()) continue;
        const double part = 1.0 / (k * static_cast<double>(affs.size()));
        for (const auto& a : affs) share[a] += part;
    }
    return share;
}

namespace detail {

inline std::span<const AuthorAffiliationRecord> rows_for(std::span<const AuthorAffiliationRecord> sorted,
                                                         const std::string& paper_id) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), paper_id,
                               [](const AuthorAffiliationRecord& r, const std::string& id) { return r.paper_id < id; });
    auto hi = std::upper_bound(lo, sorted.end(), paper_id,
                               [](const std::string& id, const AuthorAffiliationRecord& r) { return id < r.paper_id; });
    return {lo, hi};
}

}  // namespace detail

/// Aggregates fractional votes of the counted papers into per
/// (conference, year, affiliation) rel scores.
inline RelScoreTable compute_rel_scores(std::span<const PaperRecord> papers,
                                        std::span<const AuthorAffiliationRecord> affils,
                                        const std::set<std::string>& full_paper_ids) {
    std::map<std::string, const PaperRecord*> by_id;
    for (const auto& p : papers) by_id.emplace(p.paper_id, &p);
    for (const auto& id : full_paper_ids)
        if (!by_id.contains(id)) throw Error(ErrorKind::UnknownPaper, "paper '" + id + "' not in corpus");

    std::vector<AuthorAffiliationRecord> rows(affils.begin(), affils.end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

    std::map<RelScoreKey, CompensatedSum> sums;
    for (const auto& id : full_paper_ids) {
        const PaperRecord& paper = *by_id.at(id);
        for (const auto& [aff, share] : paper_contributions(detail::rows_for(rows, id)))
            sums[{paper.conference_id, paper.year, aff}].add(share);
    }

    RelScoreTable table;
    for (const auto& [key, sum] : sums) table.entries.emplace(key, sum.value());
    return table;
}

/// Every paper in the corpus counts.
inline RelScoreTable compute_rel_scores(std::span<const PaperRecord> papers,
                                        std::span<const AuthorAffiliationRecord> affils) {
    std::set<std::string> ids;
    for (const auto& p : papers) ids.insert(p.paper_id);
    return compute_rel_scores(papers, affils, ids);
}

inline RelScoreSeries build_series(const RelScoreTable& table, const std::string& conference_id,
                                   const std::string& affiliation_id, int first_year, int last_year) {
    RelScoreSeries s{affiliation_id, conference_id, first_year, {}};
    if (last_year < first_year) return s;
    s.values.reserve(static_cast<std::size_t>(last_year - first_year + 1));
    for (int y = first_year; y <= last_year; ++y) s.values.push_back(table.at(conference_id, y, affiliation_id));
    return s;
}

/// First and last year in which the conference has any rel score.
inline std::optional<std::pair<int, int>> conference_years(const RelScoreTable& table,
                                                           const std::string& conference_id) {
    std::optional<std::pair<int, int>> span;
    for (const auto& [key, score] : table.entries) {
        if (key.conference_id != conference_id) continue;
        if (!span) span = {key.year, key.year};
        span->first = std::min(span->first, key.year);
        span->second = std::max(span->second, key.year);
    }
    return span;
}

/// Zero-filled series for every affiliation with a positive score in the
/// conference between first_year and last_year. Ordered by affiliation_id.
inline std::vector<RelScoreSeries> build_series_set(const RelScoreTable& table, const std::string& conference_id,
                                                    int first_year, int last_year) {
    std::set<std::string> affiliations;
    for (const auto& [key, score] : table.entries)
        if (key.conference_id == conference_id && key.year >= first_year && key.year <= last_year && score > 0.0)
            affiliations.insert(key.affiliation_id);
    std::vector<RelScoreSeries> out;
    for (const auto& aff : affiliations) out.push_back(build_series(table, conference_id, aff, first_year, last_year));
    return out;
}

/// conference_id, year, affiliation_id, score with 6 decimals; sorted by
/// conference, year, score descending, affiliation ascending.
inline void write_rel_scores(std::ostream& out, const RelScoreTable& table) {
    std::vector<std::pair<RelScoreKey, double>> rows(table.entries.begin(), table.entries.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first.conference_id, a.first.year, b.second, a.first.affiliation_id) <
               std::tie(b.first.conference_id, b.first.year, a.second, b.first.affiliation_id);
    });
    for (const auto& [key, score] : rows)
        out << key.conference_id << '\t' << key.year << '\t' << key.affiliation_id << '\t' << tsv::fixed(score, 6)
            << '\n';
}

inline void write_rel_scores(const std::string& path, const RelScoreTable& table) {
    auto out = tsv::open_output(path);
    write_rel_scores(out, table);
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

inline RelScoreTable read_rel_scores(const std::string& path) {
    RelScoreTable table;
    std::size_t line_no = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++line_no;
        auto f = tsv::split(line);
        auto year = f.size() == 4 ? tsv::parse_int<int>(f[1]) : std::nullopt;
        auto score = f.size() == 4 ? tsv::parse_double(f[3]) : std::nullopt;
        if (!year || !score || *score < 0.0 || f[0].empty() || f[2].empty())
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": bad rel-score row");
        table.entries[{std::string(f[0]), *year, std::string(f[2])}] += *score;
    });
    return table;
}

}  // namespace instrank
