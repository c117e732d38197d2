#include "instrank/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace {

struct OptionDoc {
    const char* key;
    const char* help;
};

const std::map<std::string, OptionDoc> kOptions = {
    {"conference", {"conference", "conference id (comma-separated list for ingest)"}},
    {"papers", {"papers", "papers TSV"}},
    {"paa", {"paa", "paper-author-affiliation TSV"}},
    {"full-papers", {"full-papers", "file with one counted paper id per line"}},
    {"relscores", {"relscores", "rel-score TSV (instead of --papers/--paa)"}},
    {"proceedings", {"proceedings", "proceedings dump TSV"}},
    {"dictionary", {"dictionary", "section keyword file, one keyword per line"}},
    {"section-train", {"section-train", "section name training TSV (name, 0/1)"}},
    {"page-train", {"page-train", "page count training TSV (pages, 0/1)"}},
    {"policy", {"policy", "unanimous (default) or majority"}},
    {"review", {"review", "review queue output TSV"}},
    {"truth", {"truth", "rel-score TSV holding the ground truth"}},
    {"prediction", {"prediction", "prediction file to score"}},
    {"out", {"out", "output file"}},
    {"out-dir", {"out-dir", "output directory"}},
    {"model", {"model", "naive | es | arima | last3"}},
    {"alpha", {"alpha", "smoothing factor for --model es (default 0.4)"}},
    {"grid", {"grid", "comma-separated alpha grid; enables grid search"}},
    {"orders", {"orders", "ARIMA candidates, e.g. 1,1,1;1,1,0;0,1,1"}},
    {"year", {"year", "target year (default: last observed + 1)"}},
    {"years", {"years", "comma-separated target years"}},
    {"until-year", {"until-year", "only papers up to this year"}},
    {"n", {"n", "NDCG cutoff (default 20)"}},
    {"seed", {"seed", "seed for every stochastic component (default 0)"}},
    {"trees", {"trees", "page-model ensemble size (default 25)"}},
    {"match-threshold", {"match-threshold", "soft title match cutoff on normalized cost (default 0.2)"}},
    {"max-malformed", {"max-malformed", "tolerated malformed-row ratio (default 0.01)"}},
    {"damping", {"damping", "PageRank damping (default 0.85)"}},
    {"tolerance", {"tolerance", "PageRank tolerance (default 1e-10)"}},
};

const std::vector<std::pair<std::string, std::vector<std::string>>> kSubcommands = {
    {"ingest", {"conference", "papers", "paa", "out-dir", "max-malformed"}},
    {"filter-papers",
     {"conference", "papers", "paa", "proceedings", "dictionary", "section-train", "page-train", "policy", "review",
      "out", "seed", "trees", "match-threshold", "max-malformed"}},
    {"relscore",
     {"conference", "papers", "paa", "full-papers", "proceedings", "dictionary", "section-train", "page-train",
      "policy", "review", "out", "seed", "trees", "match-threshold", "max-malformed"}},
    {"forecast", {"conference", "relscores", "year", "model", "alpha", "orders", "out"}},
    {"evaluate", {"conference", "prediction", "truth", "year", "n"}},
    {"cv",
     {"conference", "relscores", "papers", "paa", "full-papers", "model", "alpha", "grid", "orders", "years", "n", "out",
      "max-malformed"}},
    {"netrank", {"conference", "papers", "paa", "until-year", "damping", "tolerance", "out", "max-malformed"}},
    {"pipeline",
     {"conference", "papers", "paa", "full-papers", "relscores", "proceedings", "dictionary", "section-train",
      "page-train", "policy", "review", "model", "alpha", "orders", "year", "n", "truth", "out", "seed", "trees",
      "match-threshold", "max-malformed"}},
};

const std::map<std::string, std::string> kDescriptions = {
    {"ingest", "filter MAG-style TSV dumps to the requested conferences and write a canonical corpus"},
    {"filter-papers", "identify full research papers from a proceedings dump"},
    {"relscore", "compute per conference-year affiliation rel scores"},
    {"forecast", "forecast next-year rel scores and write a prediction file"},
    {"evaluate", "score a prediction file with NDCG@N"},
    {"cv", "rolling-origin cross-validation, optionally with an alpha grid search"},
    {"netrank", "rank affiliations by PageRank on the co-authorship network"},
    {"pipeline", "rel scores, forecast and optional evaluation in one run"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Institution ranking from publication histories"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value configuration file; flags override it");

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, bool> evaluate_flag;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, keys] : kSubcommands) {
        auto* sub = app.add_subcommand(name, kDescriptions.at(name));
        subs[name] = sub;
        for (const auto& key : keys) sub->add_option("--" + key, values[name][key], kOptions.at(key).help);
        if (name == "pipeline") sub->add_flag("--evaluate", evaluate_flag[name], "score the forecast against truth");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& [name, keys] : kSubcommands) {
        auto* sub = subs.at(name);
        if (!sub->parsed()) continue;
        instrank::cli::RunConfig cfg;
        try {
            if (!config_path.empty()) instrank::cli::load_config_file(cfg, config_path);
            for (const auto& key : keys)
                if (sub->count("--" + key) > 0) instrank::cli::apply_setting(cfg, key, values[name][key]);
            if (evaluate_flag[name]) cfg.evaluate = true;
        } catch (const instrank::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return instrank::exit_code_for(e.kind());
        }
        return instrank::cli::run_command(name, cfg, std::cout, std::cerr);
    }
    return 0;
}
