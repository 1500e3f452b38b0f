#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hce/cluster.hpp"
#include "hce/detail/text.hpp"
#include "hce/embedding.hpp"
#include "hce/lexicon.hpp"
#include "hce/types.hpp"

namespace hce {

struct RelatednessPair {
    std::string word1;
    std::string word2;
    double score = 0.0;
};

struct RelatednessDataset {
    std::string name;
    std::vector<RelatednessPair> pairs;
};

/// `word1<TAB>word2<TAB>score` per line, scores in [0, 10], each unordered
/// pair at most once.
inline RelatednessDataset parse_relatedness(std::istream& in, std::string name = {}) {
    RelatednessDataset ds{std::move(name), {}};
    std::set<std::pair<std::string, std::string>> seen;
    detail::for_each_line(in, [&](std::size_t n, std::string_view line) {
        if (detail::trim(line).empty()) return;
        auto f = detail::split(line, '\t');
        if (f.size() != 3) detail::fail_at("relatedness", n, "expected word1<TAB>word2<TAB>score");
        RelatednessPair p{std::string(detail::trim(f[0])), std::string(detail::trim(f[1])), 0.0};
        if (p.word1.empty() || p.word2.empty()) detail::fail_at("relatedness", n, "empty word");
        try {
            p.score = detail::parse_double(f[2], "score");
        } catch (const Error& e) {
            detail::fail_at("relatedness", n, e.what());
        }
        if (!(p.score >= 0.0 && p.score <= 10.0)) detail::fail_at("relatedness", n, "score outside [0, 10]");
        auto key = std::minmax(p.word1, p.word2);
        if (!seen.emplace(key.first, key.second).second) detail::fail_at("relatedness", n, "duplicate pair");
        ds.pairs.push_back(std::move(p));
    });
    return ds;
}

/// Cosine similarity of the two nodes' input vectors.
inline double relatedness_score(const VectorStore& store, NodeId a, NodeId b) {
    return cosine(store.vector(a), store.vector(b));
}

/// Fractional ranks (1-based); tied values share their mean rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
        i = j + 1;
    }
    return ranks;
}

inline bool has_ties(std::span<const double> xs) {
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

/// Spearman's rho. Without ties this is 1 - 6 sum d^2 / (n (n^2 - 1)); with
/// ties it is the Pearson correlation of the average ranks.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("spearman: inputs differ in length");
    const std::size_t n = xs.size();
    if (n < 2) throw Error("spearman: need at least two observations");
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
    };
    if (constant(xs) || constant(ys)) throw Error("spearman: undefined for a constant input");

    auto rx = average_ranks(xs), ry = average_ranks(ys);
    if (!has_ties(xs) && !has_ties(ys)) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        double nn = static_cast<double>(n);
        return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    }
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

enum class Resolution { Entity, Category, Unmapped };

inline std::string to_string(Resolution r) {
    switch (r) {
        case Resolution::Entity: return "entity";
        case Resolution::Category: return "category";
        case Resolution::Unmapped: return "unmapped";
    }
    return "?";
}

struct PairOutcome {
    RelatednessPair pair;
    Resolution first = Resolution::Unmapped;
    Resolution second = Resolution::Unmapped;
    std::optional<double> model_score;
};

struct MappingReport {
    std::size_t total = 0;
    std::size_t mapped = 0;
    std::size_t unmapped = 0;
    std::vector<PairOutcome> pairs;
};

struct RelatednessReport {
    std::string dataset;
    double rho = 0.0;
    MappingReport mapping;
};

/// Maps both words of every pair, drops pairs with an unmapped word, and
/// correlates cosine scores with the human scores of the survivors.
inline RelatednessReport run_relatedness(const VectorStore& store, const RelatednessDataset& ds) {
    RelatednessReport rep;
    rep.dataset = ds.name;
    const LexicalMatcher matcher(store.vocab());
    auto resolve = [](const std::optional<NodeId>& n) {
        if (!n) return Resolution::Unmapped;
        return n->kind == NodeKind::Entity ? Resolution::Entity : Resolution::Category;
    };
    std::vector<double> model, human;
    for (const auto& p : ds.pairs) {
        PairOutcome out{p, Resolution::Unmapped, Resolution::Unmapped, std::nullopt};
        auto a = matcher.node(p.word1), b = matcher.node(p.word2);
        out.first = resolve(a);
        out.second = resolve(b);
        if (a && b) {
            out.model_score = relatedness_score(store, *a, *b);
            model.push_back(*out.model_score);
            human.push_back(p.score);
            ++rep.mapping.mapped;
        } else {
            ++rep.mapping.unmapped;
        }
        rep.mapping.pairs.push_back(std::move(out));
    }
    rep.mapping.total = ds.pairs.size();
    if (model.size() < 2)
        throw Error("relatedness: fewer than two pairs survive word mapping in '" + ds.name + "'");
    rep.rho = spearman(model, human);
    return rep;
}

}  // namespace hce
