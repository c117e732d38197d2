#pragma once

#include "instrank/error.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace instrank {

struct PaperRecord {
    std::string paper_id;
    std::string normalized_title;
    std::string conference_id;
    int year = 0;
    std::optional<int> page_count;
    std::optional<std::string> section_name;

    friend auto operator<=>(const PaperRecord&, const PaperRecord&) = default;
};

/// An empty affiliation_id marks an author known to the paper but carrying
/// no affiliation; such rows count towards the author total only.
struct AuthorAffiliationRecord {
    std::string paper_id;
    std::string author_id;
    std::string affiliation_id;

    friend auto operator<=>(const AuthorAffiliationRecord&, const AuthorAffiliationRecord&) = default;
};

struct TitleMatch {
    std::string query_title;
    std::string matched_paper_id;
    std::size_t cost = 0;
    bool exact = false;

    friend bool operator==(const TitleMatch&, const TitleMatch&) = default;
};

/// One entry of an offline proceedings dump.
struct ProceedingsRecord {
    std::string conference_id;
    int year = 0;
    std::string section_name;
    std::string title;
    std::optional<int> page_count;
};

struct IngestOptions {
    double max_malformed_ratio = 0.01;
};

struct IngestReport {
    std::size_t paper_rows = 0;
    std::size_t paper_malformed = 0;
    std::size_t paper_filtered = 0;
    std::size_t paper_duplicates = 0;
    std::size_t paa_rows = 0;
    std::size_t paa_malformed = 0;
    std::size_t paa_unknown_paper = 0;
    std::size_t paa_duplicates = 0;
};

struct Corpus {
    std::vector<PaperRecord> papers;              // ascending paper_id
    std::vector<AuthorAffiliationRecord> affiliations;  // ascending (paper, author, affiliation)
    IngestReport report;
};

constexpr int kMinYear = 1900;
constexpr int kMaxYear = 2100;

/// Lowercases ASCII letters, turns every other non-alphanumeric ASCII byte into
/// a space and collapses whitespace runs. Non-ASCII bytes are kept verbatim.
inline std::string normalize_title(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char ch : raw) {
        bool keep = ch >= 0x80 || std::isalnum(ch);
        if (!keep) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(ch < 0x80 ? std::tolower(ch) : ch));
    }
    return out;
}

/// Unit-cost Levenshtein distance over bytes.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
            diag = up;
        }
    }
    return row[b.size()];
}

/// Exact title lookup first, then the minimum-cost alignment over the whole
/// corpus. A soft match is rejected when cost / max(len) exceeds `threshold`.
inline TitleMatch match_title(std::string_view query, std::span<const PaperRecord> corpus,
                              double threshold = 0.2) {
    if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no papers to match against");

    const PaperRecord* exact = nullptr;
    for (const auto& p : corpus)
        if (p.normalized_title == query && (!exact || p.paper_id < exact->paper_id)) exact = &p;
    if (exact) return {std::string(query), exact->paper_id, 0, true};

    const PaperRecord* best = nullptr;
    std::size_t best_cost = 0;
    for (const auto& p : corpus) {
        std::size_t cost = edit_distance(query, p.normalized_title);
        if (!best || cost < best_cost || (cost == best_cost && p.paper_id < best->paper_id)) {
            best = &p;
            best_cost = cost;
        }
    }
    std::size_t longest = std::max(query.size(), best->normalized_title.size());
    double normalized = longest == 0 ? 0.0 : static_cast<double>(best_cost) / static_cast<double>(longest);
    if (normalized > threshold)
        throw Error(ErrorKind::NoMatch, "no title within threshold for '" + std::string(query) + "'");
    return {std::string(query), best->paper_id, best_cost, false};
}

/// Keeps one match per paper: lowest cost, then ascending query title.
/// Output is ordered by matched_paper_id.
inline std::vector<TitleMatch> dedupe(std::span<const TitleMatch> matches) {
    std::map<std::string, TitleMatch> best;
    for (const auto& m : matches) {
        auto [it, inserted] = best.try_emplace(m.matched_paper_id, m);
        if (inserted) continue;
        auto& kept = it->second;
        if (std::tie(m.cost, m.query_title) < std::tie(kept.cost, kept.query_title)) kept = m;
    }
    std::vector<TitleMatch> out;
    out.reserve(best.size());
    for (auto& [id, m] : best) out.push_back(std::move(m));
    return out;
}

namespace detail {

inline std::optional<std::optional<int>> parse_page_count(std::string_view field) {
    if (field.empty()) return std::optional<int>{};
    auto v = tsv::parse_int<int>(field);
    if (!v || *v < 0) return std::nullopt;
    return std::optional<int>{*v};
}

inline std::optional<int> parse_year(std::string_view field) {
    auto y = tsv::parse_int<int>(field);
    if (!y || *y < kMinYear || *y > kMaxYear) return std::nullopt;
    return y;
}

inline std::optional<PaperRecord> parse_paper_row(std::string_view line) {
    auto f = tsv::split(line);
    if (f.size() != 7 || f[0].empty() || f[4].empty()) return std::nullopt;
    auto year = parse_year(f[3]);
    auto pages = parse_page_count(f[5]);
    if (!year || !pages) return std::nullopt;
    PaperRecord rec;
    rec.paper_id = std::string(f[0]);
    rec.normalized_title = normalize_title(f[2].empty() ? f[1] : f[2]);
    rec.year = *year;
    rec.conference_id = std::string(f[4]);
    rec.page_count = *pages;
    if (!f[6].empty()) rec.section_name = std::string(f[6]);
    return rec;
}

inline void check_ratio(std::size_t bad, std::size_t total, double limit, const std::string& path) {
    if (total == 0) return;
    double ratio = static_cast<double>(bad) / static_cast<double>(total);
    if (ratio > limit)
        throw Error(ErrorKind::FormatError, path + ": " + std::to_string(bad) + " of " +
                                                std::to_string(total) + " rows malformed");
}

}  // namespace detail

/// Reads a papers TSV and a paper-author-affiliation TSV, keeping only the
/// requested conference series (all series when `conference_ids` is empty).
/// Output is canonical: independent of input row order.
inline Corpus ingest_corpus(const std::string& papers_path, const std::string& paa_path,
                            const std::set<std::string>& conference_ids, const IngestOptions& opts = {}) {
    Corpus corpus;
    auto& rep = corpus.report;

    std::map<std::string, PaperRecord> by_id;
    tsv::for_each_line(papers_path, [&](std::string_view line) {
        ++rep.paper_rows;
        auto rec = detail::parse_paper_row(line);
        if (!rec) {
            ++rep.paper_malformed;
            return;
        }
        if (!conference_ids.empty() && !conference_ids.contains(rec->conference_id)) {
            ++rep.paper_filtered;
            return;
        }
        auto [it, inserted] = by_id.try_emplace(rec->paper_id, *rec);
        if (!inserted) {
            ++rep.paper_duplicates;
            if (*rec < it->second) it->second = std::move(*rec);
        }
    });
    detail::check_ratio(rep.paper_malformed, rep.paper_rows, opts.max_malformed_ratio, papers_path);

    std::set<AuthorAffiliationRecord> rows;
    tsv::for_each_line(paa_path, [&](std::string_view line) {
        ++rep.paa_rows;
        auto f = tsv::split(line);
        if (f.size() != 3 || f[0].empty() || f[1].empty()) {
            ++rep.paa_malformed;
            return;
        }
        if (!by_id.contains(std::string(f[0]))) {
            ++rep.paa_unknown_paper;
            return;
        }
        if (!rows.insert({std::string(f[0]), std::string(f[1]), std::string(f[2])}).second)
            ++rep.paa_duplicates;
    });
    detail::check_ratio(rep.paa_malformed, rep.paa_rows, opts.max_malformed_ratio, paa_path);

    corpus.papers.reserve(by_id.size());
    for (auto& [id, rec] : by_id) corpus.papers.push_back(std::move(rec));
    corpus.affiliations.assign(rows.begin(), rows.end());
    return corpus;
}

/// Proceedings dump: conference_id, year, section_name, title, page_count.
inline std::vector<ProceedingsRecord> read_proceedings(const std::string& path, const IngestOptions& opts = {}) {
    std::vector<ProceedingsRecord> out;
    std::size_t rows = 0, bad = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++rows;
        auto f = tsv::split(line);
        if (f.size() != 5 || f[0].empty() || f[3].empty()) {
            ++bad;
            return;
        }
        auto year = detail::parse_year(f[1]);
        auto pages = detail::parse_page_count(f[4]);
        if (!year || !pages) {
            ++bad;
            return;
        }
        out.push_back({std::string(f[0]), *year, std::string(f[2]), std::string(f[3]), *pages});
    });
    detail::check_ratio(bad, rows, opts.max_malformed_ratio, path);
    return out;
}

inline void write_papers(const std::string& path, std::span<const PaperRecord> papers) {
    auto out = tsv::open_output(path);
    for (const auto& p : papers) {
        out << p.paper_id << '\t' << p.normalized_title << '\t' << p.normalized_title << '\t' << p.year << '\t'
            << p.conference_id << '\t';
        if (p.page_count) out << *p.page_count;
        out << '\t' << p.section_name.value_or("") << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

inline void write_affiliations(const std::string& path, std::span<const AuthorAffiliationRecord> rows) {
    auto out = tsv::open_output(path);
    for (const auto& r : rows) out << r.paper_id << '\t' << r.author_id << '\t' << r.affiliation_id << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

}  // namespace instrank
