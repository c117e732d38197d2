#pragma once

#include "instrank/error.hpp"
#include "instrank/ingest.hpp"
#include "instrank/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace instrank {

/// Undirected co-authorship network between affiliations. Edge keys are
/// stored with first < second.
struct AffiliationGraph {
    std::vector<std::string> nodes;  // ascending
    std::map<std::pair<std::string, std::string>, long long> edges;

    long long weight(const std::string& a, const std::string& b) const {
        auto it = edges.find(a < b ? std::pair{a, b} : std::pair{b, a});
        return it == edges.end() ? 0 : it->second;
    }
};

/// Each paper of the conference adds 1 to every unordered pair of distinct
/// affiliations on it, however many authors share them. `until_year`
/// restricts the graph to papers published no later than that year.
inline AffiliationGraph build_graph(std::span<const PaperRecord> papers,
                                    std::span<const AuthorAffiliationRecord> affils,
                                    const std::string& conference_id, std::optional<int> until_year = std::nullopt) {
    std::set<std::string> in_conference;
    for (const auto& p : papers)
        if (p.conference_id == conference_id && (!until_year || p.year <= *until_year)) in_conference.insert(p.paper_id);

    std::map<std::string, std::set<std::string>> per_paper;
    for (const auto& r : affils)
        if (!r.affiliation_id.empty() && in_conference.contains(r.paper_id)) per_paper[r.paper_id].insert(r.affiliation_id);

    AffiliationGraph g;
    std::set<std::string> nodes;
    for (const auto& [paper, affs] : per_paper) {
        nodes.insert(affs.begin(), affs.end());
        for (auto i = affs.begin(); i != affs.end(); ++i)
            for (auto j = std::next(i); j != affs.end(); ++j) ++g.edges[{*i, *j}];
    }
    g.nodes.assign(nodes.begin(), nodes.end());
    return g;
}

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
};

/// Power iteration on the weight-normalised transition matrix with uniform
/// teleport; a node without edges spreads its mass uniformly over all nodes.
/// Stops when the largest per-node change drops below the tolerance.
inline std::map<std::string, double> pagerank(const AffiliationGraph& graph, const PageRankOptions& opts = {}) {
    if (graph.nodes.empty()) throw Error(ErrorKind::EmptyGraph, "graph has no nodes");
    if (!(opts.damping > 0.0 && opts.damping < 1.0) || !(opts.tolerance > 0.0))
        throw Error(ErrorKind::InvalidArgument, "damping must be in (0,1) and tolerance positive");

    const std::size_t n = graph.nodes.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(graph.nodes[i], i);

    // adjacency[i] = (neighbour, weight)
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(n);
    std::vector<double> strength(n, 0.0);
    for (const auto& [pair, w] : graph.edges) {
        const std::size_t a = index.at(pair.first), b = index.at(pair.second);
        adjacency[a].emplace_back(b, static_cast<double>(w));
        adjacency[b].emplace_back(a, static_cast<double>(w));
        strength[a] += static_cast<double>(w);
        strength[b] += static_cast<double>(w);
    }

    const double dn = static_cast<double>(n);
    std::vector<double> rank(n, 1.0 / dn), next(n);
    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (strength[i] == 0.0) dangling += rank[i];
        const double base = (1.0 - opts.damping) / dn + opts.damping * dangling / dn;
        std::fill(next.begin(), next.end(), base);
        for (std::size_t i = 0; i < n; ++i) {
            if (strength[i] == 0.0) continue;
            const double share = opts.damping * rank[i] / strength[i];
            for (const auto& [j, w] : adjacency[i]) next[j] += share * w;
        }
        double delta = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            delta = std::max(delta, std::abs(next[i] - rank[i]));
            total += next[i];
        }
        for (auto& v : next) v /= total;
        rank.swap(next);
        if (delta < opts.tolerance) break;
    }

    std::map<std::string, double> scores;
    for (std::size_t i = 0; i < n; ++i) scores.emplace(graph.nodes[i], rank[i]);
    return scores;
}

/// affiliation_id, score (10 decimals); score descending, id ascending.
inline void write_pagerank(std::ostream& out, const std::map<std::string, double>& scores) {
    std::vector<std::pair<std::string, double>> rows(scores.begin(), scores.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [aff, s] : rows) out << aff << '\t' << tsv::fixed(s, 10) << '\n';
}

}  // namespace instrank
