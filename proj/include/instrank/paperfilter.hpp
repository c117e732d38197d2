#pragma once

#include "instrank/error.hpp"
#include "instrank/ingest.hpp"
#include "instrank/random.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace instrank {

// ---------------------------------------------------------------------------
// Dictionary rules

/// Section keywords that mark non-research content. The first four come from
/// the contest write-up; demo, tutorial and workshop are local additions.
inline std::vector<std::string> default_dictionary() {
    return {"keynote", "panel", "industry track", "posters", "demo", "tutorial", "workshop"};
}

inline std::vector<std::string> read_dictionary(const std::string& path) {
    std::vector<std::string> words;
    tsv::for_each_line(path, [&](std::string_view line) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) words.emplace_back(line);
    });
    return words;
}

namespace detail {
inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}
}  // namespace detail

/// True (full paper) unless the section name contains a dictionary keyword,
/// compared case-insensitively.
inline bool rule_filter(std::string_view section_name, std::span<const std::string> dictionary) {
    if (dictionary.empty()) throw Error(ErrorKind::InvalidArgument, "keyword dictionary is empty");
    const auto name = detail::ascii_lower(section_name);
    for (const auto& kw : dictionary) {
        auto lowered = detail::ascii_lower(kw);
        if (!lowered.empty() && name.find(lowered) != std::string::npos) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// tf-idf + linear SVM over section names

struct SectionExample {
    std::string section_name;
    bool label = false;

    friend auto operator<=>(const SectionExample&, const SectionExample&) = default;
};

/// Lowercase ASCII alphanumeric runs.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

using SparseVector = std::vector<std::pair<std::size_t, double>>;

struct TfidfModel {
    std::map<std::string, std::size_t> vocabulary;
    std::vector<double> idf;
    std::vector<double> weights;
    double bias = 0.0;

    /// Raw term counts times idf, L2-normalised; unknown tokens are dropped.
    /// Entries are ordered by feature index.
    SparseVector vectorize(std::string_view text) const {
        std::map<std::size_t, double> counts;
        for (const auto& tok : tokenize(text)) {
            auto it = vocabulary.find(tok);
            if (it != vocabulary.end()) counts[it->second] += 1.0;
        }
        SparseVector v;
        double norm = 0.0;
        for (const auto& [idx, tf] : counts) {
            double x = tf * idf[idx];
            v.emplace_back(idx, x);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (auto& [idx, x] : v) x /= norm;
        return v;
    }

    double decision_value(std::string_view text) const {
        double s = bias;
        for (const auto& [idx, x] : vectorize(text)) s += weights[idx] * x;
        return s;
    }
};

struct TextClassifierOptions {
    double regularization = 1.0;  // C of the hinge-loss SVM
    double tolerance = 1e-6;
    std::size_t max_epochs = 10000;
    std::uint64_t seed = 0;
};

inline bool classify_section(const TfidfModel& model, std::string_view section_name) {
    return model.decision_value(section_name) > 0.0;
}

/// Smoothed idf ln((1+N)/(1+df)) + 1 and an L2-regularised hinge-loss SVM
/// solved by dual coordinate descent, the bias treated as a constant feature.
inline TfidfModel train_text_classifier(std::span<const SectionExample> input,
                                        const TextClassifierOptions& opts = {}) {
    std::vector<SectionExample> examples(input.begin(), input.end());
    std::sort(examples.begin(), examples.end());
    const bool has_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label; });
    const bool has_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return !e.label; });
    if (!has_pos || !has_neg) throw Error(ErrorKind::DegenerateLabels, "section examples need both labels");

    TfidfModel model;
    std::map<std::string, std::size_t> df;
    for (const auto& e : examples) {
        auto toks = tokenize(e.section_name);
        std::set<std::string> uniq(toks.begin(), toks.end());
        for (const auto& t : uniq) ++df[t];
    }
    const double n_docs = static_cast<double>(examples.size());
    for (const auto& [tok, count] : df) {
        model.vocabulary.emplace(tok, model.idf.size());
        model.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    model.weights.assign(model.idf.size(), 0.0);

    std::vector<SparseVector> xs;
    std::vector<double> ys, qdiag;
    for (const auto& e : examples) {
        xs.push_back(model.vectorize(e.section_name));
        ys.push_back(e.label ? 1.0 : -1.0);
        double q = 1.0;  // bias feature
        for (const auto& [idx, x] : xs.back()) q += x * x;
        qdiag.push_back(q);
    }

    const double C = opts.regularization;
    std::vector<double> alpha(xs.size(), 0.0);
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(opts.seed);

    for (std::size_t epoch = 0; epoch < opts.max_epochs; ++epoch) {
        rng.shuffle(order);
        double max_pg = -INFINITY, min_pg = INFINITY;
        for (std::size_t i : order) {
            double margin = model.bias;
            for (const auto& [idx, x] : xs[i]) margin += model.weights[idx] * x;
            const double g = ys[i] * margin - 1.0;
            double pg = g;
            if (alpha[i] == 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] == C)
                pg = std::max(g, 0.0);
            max_pg = std::max(max_pg, pg);
            min_pg = std::min(min_pg, pg);
            if (pg == 0.0) continue;
            const double old = alpha[i];
            alpha[i] = std::clamp(old - g / qdiag[i], 0.0, C);
            const double step = (alpha[i] - old) * ys[i];
            for (const auto& [idx, x] : xs[i]) model.weights[idx] += step * x;
            model.bias += step;
        }
        if (max_pg - min_pg <= opts.tolerance) break;
    }
    return model;
}

inline double training_accuracy(const TfidfModel& model, std::span<const SectionExample> examples) {
    if (examples.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& e : examples) hits += classify_section(model, e.section_name) == e.label;
    return static_cast<double>(hits) / static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// Page-length ensemble

struct PageExample {
    int page_count = 0;
    bool label = false;

    friend auto operator<=>(const PageExample&, const PageExample&) = default;
};

/// A single split: page_count <= threshold goes left. Without a threshold
/// the stump votes `left` everywhere.
struct Stump {
    std::optional<double> threshold;
    bool left = false;
    bool right = false;

    bool vote(double pages) const { return !threshold || pages <= *threshold ? left : right; }
};

struct PageLengthModel {
    /// Strictly increasing split points; interval i holds counts in
    /// (thresholds[i-1], thresholds[i]].
    std::vector<double> thresholds;
    /// Fraction of trees voting "full paper", one per interval.
    std::vector<double> vote_fractions;

    double vote_fraction(double pages) const {
        auto idx = std::lower_bound(thresholds.begin(), thresholds.end(), pages) - thresholds.begin();
        return vote_fractions[static_cast<std::size_t>(idx)];
    }
    bool predict(double pages) const { return vote_fraction(pages) >= 0.5; }
};

struct PageModelOptions {
    std::size_t trees = 25;
    std::uint64_t seed = 0;
};

/// Gini-optimal depth-1 split of one sample; ties go to the lowest threshold.
inline Stump fit_stump(std::span<const PageExample> sample) {
    std::size_t pos = 0;
    for (const auto& e : sample) pos += e.label;
    const std::size_t n = sample.size();
    Stump stump;
    stump.left = stump.right = 2 * pos >= n;
    if (pos == 0 || pos == n) return stump;

    std::vector<PageExample> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    auto gini = [](double p, double total) { return total == 0.0 ? 0.0 : total * 2.0 * (p / total) * (1.0 - p / total); };
    const double parent = gini(static_cast<double>(pos), static_cast<double>(n));

    double best = parent;
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += sorted[i].label;
        if (sorted[i].page_count == sorted[i + 1].page_count) continue;
        const double nl = static_cast<double>(i + 1), nr = static_cast<double>(n - i - 1);
        const double pl = static_cast<double>(left_pos), pr = static_cast<double>(pos - left_pos);
        const double impurity = gini(pl, nl) + gini(pr, nr);
        if (impurity < best) {
            best = impurity;
            stump.threshold = 0.5 * (sorted[i].page_count + sorted[i + 1].page_count);
            stump.left = 2.0 * pl >= nl;
            stump.right = 2.0 * pr >= nr;
        }
    }
    return stump;
}

/// Bagged stumps on page count; each tree sees a bootstrap resample of the
/// canonically ordered training set.
inline PageLengthModel train_page_model(std::span<const PageExample> input, const PageModelOptions& opts = {}) {
    std::vector<PageExample> examples(input.begin(), input.end());
    std::sort(examples.begin(), examples.end());
    const bool has_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label; });
    const bool has_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return !e.label; });
    if (!has_pos || !has_neg) throw Error(ErrorKind::DegenerateLabels, "page examples need both labels");
    if (opts.trees == 0) throw Error(ErrorKind::InvalidArgument, "ensemble needs at least one tree");

    Rng rng(opts.seed);
    std::vector<Stump> forest;
    std::vector<PageExample> sample(examples.size());
    for (std::size_t t = 0; t < opts.trees; ++t) {
        for (auto& s : sample) s = examples[rng.index(examples.size())];
        forest.push_back(fit_stump(sample));
    }

    PageLengthModel model;
    for (const auto& s : forest)
        if (s.threshold) model.thresholds.push_back(*s.threshold);
    std::sort(model.thresholds.begin(), model.thresholds.end());
    model.thresholds.erase(std::unique(model.thresholds.begin(), model.thresholds.end()), model.thresholds.end());

    auto fraction_at = [&](double x) {
        std::size_t yes = 0;
        for (const auto& s : forest) yes += s.vote(x);
        return static_cast<double>(yes) / static_cast<double>(forest.size());
    };
    const auto& th = model.thresholds;
    for (std::size_t i = 0; i <= th.size(); ++i) {
        double probe = i < th.size() ? th[i] : (th.empty() ? 0.0 : th.back() + 1.0);
        model.vote_fractions.push_back(fraction_at(probe));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Combination and review queue

enum class CombinePolicy { Unanimous, Majority };

struct FilterVotes {
    std::string paper_id;
    std::string section_name;
    std::optional<int> page_count;
    bool rule = false;
    bool text = false;
    bool page = false;
};

struct FilterDecision {
    std::vector<std::string> full_papers;  // ascending paper_id
    std::vector<std::string> rejected;     // ascending paper_id
    std::vector<FilterVotes> review_queue; // ascending paper_id
};

/// Unanimous votes are labelled automatically. Under the unanimous policy
/// every disagreement is queued for manual review; under the majority policy
/// two of three votes decide.
inline FilterDecision combine_filters(std::span<const FilterVotes> votes, CombinePolicy policy = CombinePolicy::Unanimous) {
    std::vector<FilterVotes> sorted(votes.begin(), votes.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.paper_id < b.paper_id; });
    FilterDecision out;
    for (auto& v : sorted) {
        const int yes = int{v.rule} + int{v.text} + int{v.page};
        if (yes == 3 || (policy == CombinePolicy::Majority && yes >= 2))
            out.full_papers.push_back(v.paper_id);
        else if (yes == 0 || policy == CombinePolicy::Majority)
            out.rejected.push_back(v.paper_id);
        else
            out.review_queue.push_back(std::move(v));
    }
    return out;
}

/// paper_id, section_name, page_count, rule_vote, text_vote, page_vote.
inline void write_review_queue(std::ostream& out, std::span<const FilterVotes> queue) {
    for (const auto& v : queue) {
        out << v.paper_id << '\t' << v.section_name << '\t';
        if (v.page_count) out << *v.page_count;
        out << '\t' << int{v.rule} << '\t' << int{v.text} << '\t' << int{v.page} << '\n';
    }
}

inline std::vector<SectionExample> read_section_examples(const std::string& path) {
    std::vector<SectionExample> out;
    std::size_t line_no = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++line_no;
        auto f = tsv::split(line);
        if (f.size() != 2 || f[0].empty() || (f[1] != "0" && f[1] != "1"))
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": expected section_name, 0/1");
        out.push_back({std::string(f[0]), f[1] == "1"});
    });
    return out;
}

inline std::vector<PageExample> read_page_examples(const std::string& path) {
    std::vector<PageExample> out;
    std::size_t line_no = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++line_no;
        auto f = tsv::split(line);
        auto pages = f.size() == 2 ? tsv::parse_int<int>(f[0]) : std::nullopt;
        if (!pages || *pages < 0 || (f[1] != "0" && f[1] != "1"))
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": expected page_count, 0/1");
        out.push_back({*pages, f[1] == "1"});
    });
    return out;
}

struct VoteStats {
    std::size_t proceedings = 0;
    std::size_t unmatched = 0;
    std::size_t duplicates = 0;
};

/// Matches proceedings entries to corpus papers of the same conference and
/// collects the three votes for each matched paper. A missing page count
/// counts as a "not full paper" page vote.
inline std::vector<FilterVotes> collect_votes(std::span<const ProceedingsRecord> proceedings,
                                              std::span<const PaperRecord> corpus,
                                              std::span<const std::string> dictionary, const TfidfModel& text_model,
                                              const PageLengthModel& page_model, double match_threshold = 0.2,
                                              VoteStats* stats = nullptr) {
    VoteStats st;
    std::map<std::string, std::vector<PaperRecord>> by_conference;
    for (const auto& p : corpus) by_conference[p.conference_id].push_back(p);

    std::vector<TitleMatch> matches;
    std::map<std::string, const ProceedingsRecord*> source;  // keyed by query title
    for (const auto& rec : proceedings) {
        ++st.proceedings;
        auto it = by_conference.find(rec.conference_id);
        if (it == by_conference.end()) {
            ++st.unmatched;
            continue;
        }
        auto query = normalize_title(rec.title);
        try {
            auto m = match_title(query, it->second, match_threshold);
            matches.push_back(m);
            source.try_emplace(query, &rec);
        } catch (const Error&) {
            ++st.unmatched;
        }
    }
    auto kept = dedupe(matches);
    st.duplicates = matches.size() - kept.size();

    std::vector<FilterVotes> votes;
    for (const auto& m : kept) {
        const auto& rec = *source.at(m.query_title);
        FilterVotes v{m.matched_paper_id, rec.section_name, rec.page_count, false, false, false};
        v.rule = rule_filter(rec.section_name, dictionary);
        v.text = classify_section(text_model, rec.section_name);
        v.page = rec.page_count ? page_model.predict(*rec.page_count) : false;
        votes.push_back(std::move(v));
    }
    if (stats) *stats = st;
    return votes;
}

}  // namespace instrank
