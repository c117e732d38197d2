#pragma once

#include "instrank/error.hpp"
#include "instrank/evalrank.hpp"
#include "instrank/forecast.hpp"
#include "instrank/ingest.hpp"
#include "instrank/netrank.hpp"
#include "instrank/paperfilter.hpp"
#include "instrank/relscore.hpp"
#include "instrank/tsv.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace instrank::cli {

/// Everything a run needs. Populated from the config file first, then from
/// command-line flags, so flags win.
struct RunConfig {
    std::vector<std::string> conference_ids;
    std::string papers;
    std::string paa;
    std::string full_papers;
    std::string relscores;
    std::string proceedings;
    std::string dictionary;
    std::string section_train;
    std::string page_train;
    std::string truth;
    std::string prediction;
    std::string out;
    std::string out_dir;
    std::string review;

    std::string model = "naive";
    std::optional<double> alpha;
    std::vector<double> grid;
    std::vector<ArimaOrder> orders = default_arima_orders();

    std::optional<int> year;
    std::vector<int> years;
    std::optional<int> until_year;
    int n = 20;
    bool evaluate = false;

    std::uint64_t seed = 0;
    int trees = 25;
    std::string policy = "unanimous";
    double match_threshold = 0.2;
    double max_malformed = 0.01;
    double damping = 0.85;
    double tolerance = 1e-10;
};

// ---------------------------------------------------------------------------
// Value parsing shared by the config file and the flags

inline std::vector<std::string> split_list(std::string_view text, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(sep, start);
        if (end == std::string_view::npos) end = text.size();
        auto item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

inline int parse_int_value(std::string_view key, std::string_view v) {
    auto x = tsv::parse_int<int>(v);
    if (!x) throw Error(ErrorKind::FormatError, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return *x;
}

inline double parse_double_value(std::string_view key, std::string_view v) {
    auto x = tsv::parse_double(v);
    if (!x) throw Error(ErrorKind::FormatError, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return *x;
}

/// "1,1,1;1,1,0;0,1,1"
inline std::vector<ArimaOrder> parse_orders(std::string_view v) {
    std::vector<ArimaOrder> orders;
    for (const auto& item : split_list(v, ';')) {
        auto parts = split_list(item, ',');
        if (parts.size() != 3) throw Error(ErrorKind::FormatError, "orders: expected p,d,q triples, got '" + item + "'");
        orders.push_back({parse_int_value("orders", parts[0]), parse_int_value("orders", parts[1]),
                          parse_int_value("orders", parts[2])});
    }
    return orders;
}

inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    const std::string v(value);
    auto ints = [&] {
        std::vector<int> out;
        for (const auto& s : split_list(v)) out.push_back(parse_int_value(key, s));
        return out;
    };
    if (key == "conference" || key == "conferences") cfg.conference_ids = split_list(v);
    else if (key == "papers") cfg.papers = v;
    else if (key == "paa") cfg.paa = v;
    else if (key == "full-papers") cfg.full_papers = v;
    else if (key == "relscores") cfg.relscores = v;
    else if (key == "proceedings") cfg.proceedings = v;
    else if (key == "dictionary") cfg.dictionary = v;
    else if (key == "section-train") cfg.section_train = v;
    else if (key == "page-train") cfg.page_train = v;
    else if (key == "truth") cfg.truth = v;
    else if (key == "prediction") cfg.prediction = v;
    else if (key == "out") cfg.out = v;
    else if (key == "out-dir") cfg.out_dir = v;
    else if (key == "review") cfg.review = v;
    else if (key == "model") cfg.model = v;
    else if (key == "alpha") cfg.alpha = parse_double_value(key, v);
    else if (key == "grid") {
        cfg.grid.clear();
        for (const auto& s : split_list(v)) cfg.grid.push_back(parse_double_value(key, s));
    } else if (key == "orders") cfg.orders = parse_orders(v);
    else if (key == "year") cfg.year = parse_int_value(key, v);
    else if (key == "years") cfg.years = ints();
    else if (key == "until-year") cfg.until_year = parse_int_value(key, v);
    else if (key == "n") cfg.n = parse_int_value(key, v);
    else if (key == "evaluate") cfg.evaluate = (v == "1" || v == "true" || v == "yes");
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int_value(key, v));
    else if (key == "trees") cfg.trees = parse_int_value(key, v);
    else if (key == "policy") cfg.policy = v;
    else if (key == "match-threshold") cfg.match_threshold = parse_double_value(key, v);
    else if (key == "max-malformed") cfg.max_malformed = parse_double_value(key, v);
    else if (key == "damping") cfg.damping = parse_double_value(key, v);
    else if (key == "tolerance") cfg.tolerance = parse_double_value(key, v);
    else throw Error(ErrorKind::FormatError, "unknown configuration key '" + std::string(key) + "'");
}

/// Flat `key = value` file; '#' starts a comment. Keys are the long flag
/// names without dashes in front (e.g. `full-papers = ids.txt`).
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::size_t line_no = 0;
    tsv::for_each_line(path, [&](std::string_view line) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
            return s;
        };
        line = trim(line);
        if (line.empty()) return;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::FormatError, path + ":" + std::to_string(line_no) + ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    });
}

// ---------------------------------------------------------------------------
// Shared stages

namespace detail {

inline void require(const std::string& value, std::string_view flag) {
    if (value.empty()) throw Error(ErrorKind::InvalidArgument, "missing --" + std::string(flag));
}

inline const std::string& single_conference(const RunConfig& cfg) {
    if (cfg.conference_ids.size() != 1)
        throw Error(ErrorKind::InvalidArgument, "exactly one --conference is required");
    return cfg.conference_ids.front();
}

inline Corpus load_corpus(const RunConfig& cfg, std::ostream& err) {
    require(cfg.papers, "papers");
    require(cfg.paa, "paa");
    std::set<std::string> confs(cfg.conference_ids.begin(), cfg.conference_ids.end());
    auto corpus = ingest_corpus(cfg.papers, cfg.paa, confs, IngestOptions{cfg.max_malformed});
    const auto& r = corpus.report;
    err << "ingest: " << corpus.papers.size() << " papers kept of " << r.paper_rows << " rows (" << r.paper_malformed
        << " malformed, " << r.paper_filtered << " other conferences, " << r.paper_duplicates << " duplicates); "
        << corpus.affiliations.size() << " affiliation rows kept of " << r.paa_rows << " (" << r.paa_malformed
        << " malformed, " << r.paa_unknown_paper << " unknown paper, " << r.paa_duplicates << " duplicates)\n";
    return corpus;
}

inline std::set<std::string> read_id_list(const std::string& path) {
    std::set<std::string> ids;
    tsv::for_each_line(path, [&](std::string_view line) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) ids.emplace(line);
    });
    return ids;
}

inline void write_id_list(const std::string& path, const std::vector<std::string>& ids) {
    auto out = tsv::open_output(path);
    for (const auto& id : ids) out << id << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

inline ModelSpec model_spec(const RunConfig& cfg) {
    ModelSpec spec;
    spec.kind = parse_model_kind(cfg.model);
    if (spec.kind == ModelKind::SimpleES) spec.alpha = cfg.alpha.value_or(0.4);
    if (spec.kind == ModelKind::Arima) spec.candidate_orders = cfg.orders;
    spec.validate();
    return spec;
}

inline FilterDecision run_filter(const RunConfig& cfg, const Corpus& corpus, std::ostream& err) {
    require(cfg.proceedings, "proceedings");
    require(cfg.section_train, "section-train");
    require(cfg.page_train, "page-train");
    auto dictionary = cfg.dictionary.empty() ? default_dictionary() : read_dictionary(cfg.dictionary);
    auto proceedings = read_proceedings(cfg.proceedings, IngestOptions{cfg.max_malformed});
    if (!cfg.conference_ids.empty()) {
        std::set<std::string> confs(cfg.conference_ids.begin(), cfg.conference_ids.end());
        std::erase_if(proceedings, [&](const auto& r) { return !confs.contains(r.conference_id); });
    }
    TextClassifierOptions text_opts;
    text_opts.seed = cfg.seed;
    auto text_model = train_text_classifier(read_section_examples(cfg.section_train), text_opts);
    PageModelOptions page_opts;
    page_opts.seed = cfg.seed;
    page_opts.trees = static_cast<std::size_t>(std::max(cfg.trees, 1));
    auto page_model = train_page_model(read_page_examples(cfg.page_train), page_opts);

    VoteStats stats;
    auto votes = collect_votes(proceedings, corpus.papers, dictionary, text_model, page_model, cfg.match_threshold,
                               &stats);
    CombinePolicy policy;
    if (cfg.policy == "unanimous") policy = CombinePolicy::Unanimous;
    else if (cfg.policy == "majority") policy = CombinePolicy::Majority;
    else throw Error(ErrorKind::InvalidArgument, "unknown policy '" + cfg.policy + "'");
    auto decision = combine_filters(votes, policy);
    err << "filter: " << stats.proceedings << " proceedings entries, " << stats.unmatched << " unmatched, "
        << stats.duplicates << " duplicate matches; " << decision.full_papers.size() << " full papers, "
        << decision.rejected.size() << " rejected, " << decision.review_queue.size() << " queued for review\n";
    if (!cfg.review.empty()) {
        auto out = tsv::open_output(cfg.review);
        write_review_queue(out, decision.review_queue);
    }
    return decision;
}

/// Full-paper ids from --full-papers, else from the filter inputs, else every
/// paper in the corpus.
inline std::set<std::string> counted_papers(const RunConfig& cfg, const Corpus& corpus, std::ostream& err) {
    if (!cfg.full_papers.empty()) {
        auto ids = read_id_list(cfg.full_papers);
        std::set<std::string> known;
        for (const auto& p : corpus.papers) known.insert(p.paper_id);
        std::size_t dropped = std::erase_if(ids, [&](const auto& id) { return !known.contains(id); });
        if (dropped) err << "relscore: " << dropped << " listed papers outside the selected conferences ignored\n";
        return ids;
    }
    if (!cfg.proceedings.empty()) {
        auto decision = run_filter(cfg, corpus, err);
        return {decision.full_papers.begin(), decision.full_papers.end()};
    }
    std::set<std::string> all;
    for (const auto& p : corpus.papers) all.insert(p.paper_id);
    return all;
}

inline RelScoreTable rel_scores_for(const RunConfig& cfg, std::ostream& err) {
    if (!cfg.relscores.empty()) return read_rel_scores(cfg.relscores);
    auto corpus = load_corpus(cfg, err);
    return compute_rel_scores(corpus.papers, corpus.affiliations, counted_papers(cfg, corpus, err));
}

inline Ranking forecast_year(const RelScoreTable& table, const std::string& conference, const ModelSpec& spec,
                             std::optional<int> requested_year, std::ostream& err) {
    auto span = conference_years(table, conference);
    if (!span) throw Error(ErrorKind::EmptySeries, "no rel scores for conference " + conference);
    const int year = requested_year.value_or(span->second + 1);
    if (year - 1 < span->first) throw Error(ErrorKind::EmptySeries, "no history before " + std::to_string(year));
    auto series = build_series_set(table, conference, span->first, year - 1);
    if (series.empty()) throw Error(ErrorKind::EmptySeries, "no affiliation has history before " + std::to_string(year));
    RankDiagnostics diag;
    auto ranking = rank_affiliations(series, spec, year, &diag);
    ranking.conference_id = conference;
    err << "forecast: " << conference << " " << year << " model " << spec.describe() << ", " << diag.series
        << " series, " << diag.fallbacks << " fallbacks, " << diag.failures << " failures\n";
    return ranking;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_ingest(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    detail::require(cfg.out_dir, "out-dir");
    auto corpus = detail::load_corpus(cfg, err);
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + cfg.out_dir);
    write_papers((dir / "papers.tsv").string(), corpus.papers);
    write_affiliations((dir / "paper_author_affiliations.tsv").string(), corpus.affiliations);
    return 0;
}

inline int cmd_filter_papers(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    detail::require(cfg.out, "out");
    auto corpus = detail::load_corpus(cfg, err);
    auto decision = detail::run_filter(cfg, corpus, err);
    detail::write_id_list(cfg.out, decision.full_papers);
    return 0;
}

inline int cmd_relscore(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    detail::require(cfg.out, "out");
    auto corpus = detail::load_corpus(cfg, err);
    auto table = compute_rel_scores(corpus.papers, corpus.affiliations, detail::counted_papers(cfg, corpus, err));
    write_rel_scores(cfg.out, table);
    return 0;
}

inline int cmd_forecast(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    detail::require(cfg.relscores, "relscores");
    detail::require(cfg.out, "out");
    auto table = read_rel_scores(cfg.relscores);
    auto ranking = detail::forecast_year(table, detail::single_conference(cfg), detail::model_spec(cfg), cfg.year, err);
    write_prediction(cfg.out, ranking);
    return 0;
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    detail::require(cfg.prediction, "prediction");
    detail::require(cfg.truth, "truth");
    if (!cfg.year) throw Error(ErrorKind::InvalidArgument, "missing --year");
    const auto& conference = detail::single_conference(cfg);
    auto prediction = read_prediction(cfg.prediction);
    auto truth = read_truth(cfg.truth, conference, *cfg.year);
    out << "NDCG@" << cfg.n << '\t' << tsv::fixed(ndcg_at_n(prediction, truth, static_cast<std::size_t>(cfg.n)), 6)
        << '\n';
    return 0;
}

inline int cmd_cv(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& conference = detail::single_conference(cfg);
    if (cfg.years.empty()) throw Error(ErrorKind::InvalidArgument, "missing --years");
    auto table = detail::rel_scores_for(cfg, err);
    const auto n = static_cast<std::size_t>(cfg.n);
    CvReport report;
    if (!cfg.grid.empty()) {
        auto result = grid_search_alpha(table, conference, cfg.years, n, cfg.grid);
        for (const auto& [a, r] : result.evaluated)
            err << "grid: alpha " << tsv::fixed(a, 4) << " mean " << tsv::fixed(r.mean_score, 6) << '\n';
        out << "best alpha " << tsv::fixed(result.alpha, 4) << '\n';
        report = result.report;
    } else {
        report = cross_validate(table, detail::model_spec(cfg), conference, cfg.years, n);
    }
    out << format_cv_table(report, n);
    out << "expected score " << tsv::fixed(expected_score(report), 4) << '\n';
    if (!cfg.out.empty()) {
        auto file = tsv::open_output(cfg.out);
        write_cv_report(file, report);
    }
    return 0;
}

inline int cmd_netrank(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    detail::require(cfg.out, "out");
    const auto& conference = detail::single_conference(cfg);
    auto corpus = detail::load_corpus(cfg, err);
    auto graph = build_graph(corpus.papers, corpus.affiliations, conference, cfg.until_year);
    auto scores = pagerank(graph, PageRankOptions{cfg.damping, cfg.tolerance});
    err << "netrank: " << graph.nodes.size() << " affiliations, " << graph.edges.size() << " edges\n";
    auto file = tsv::open_output(cfg.out);
    write_pagerank(file, scores);
    return 0;
}

inline int cmd_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::require(cfg.out, "out");
    const auto& conference = detail::single_conference(cfg);
    auto table = detail::rel_scores_for(cfg, err);
    auto ranking = detail::forecast_year(table, conference, detail::model_spec(cfg), cfg.year, err);
    write_prediction(cfg.out, ranking);
    if (cfg.evaluate) {
        auto truth = cfg.truth.empty() ? truth_from_table(table, conference, ranking.year)
                                       : read_truth(cfg.truth, conference, ranking.year);
        out << "NDCG@" << cfg.n << '\t'
            << tsv::fixed(ndcg_at_n(ranking, truth, static_cast<std::size_t>(cfg.n)), 6) << '\n';
    }
    return 0;
}

inline const std::map<std::string, int (*)(const RunConfig&, std::ostream&, std::ostream&)>& commands() {
    static const std::map<std::string, int (*)(const RunConfig&, std::ostream&, std::ostream&)> table{
        {"ingest", cmd_ingest},   {"filter-papers", cmd_filter_papers}, {"relscore", cmd_relscore},
        {"forecast", cmd_forecast}, {"evaluate", cmd_evaluate},         {"cv", cmd_cv},
        {"netrank", cmd_netrank}, {"pipeline", cmd_pipeline},
    };
    return table;
}

/// Runs one subcommand, turning library errors into a one-line diagnostic
/// and the matching exit code.
inline int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto it = commands().find(name);
    if (it == commands().end()) {
        err << "error: unknown command '" << name << "'\n";
        return 5;
    }
    try {
        return it->second(cfg, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 5;
    }
}

}  // namespace instrank::cli
