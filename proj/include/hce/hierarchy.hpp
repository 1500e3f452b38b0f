#pragma once

#include <algorithm>
#include <span>
#include <unordered_map>
#include <vector>

#include "hce/corpus.hpp"
#include "hce/types.hpp"

namespace hce {

struct WeightedCategory {
    CategoryId category;
    double weight = 0.0;
};

/// Categories that condition the prediction of a context entity, each with
/// its weight in the objective.
using AncestorWeights = std::vector<WeightedCategory>;

enum class Mode { CE, HCE };

namespace detail {

inline std::vector<CategoryId> checked_direct(const CategoryGraph& g, std::span<const CategoryId> direct) {
    if (direct.empty()) throw Error("direct category set is empty");
    std::vector<CategoryId> out(direct.begin(), direct.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (auto c : out)
        if (!g.contains(c)) throw Error("direct category " + std::to_string(c.value) + " is not in the graph");
    return out;
}

struct PathTotals {
    long double paths = 0;
    long double length = 0;
};

}  // namespace detail

/// A(e): the direct categories plus every transitive ancestor, sorted by
/// index. The root is left out unless it is itself a direct category.
inline std::vector<CategoryId> ancestors(const CategoryGraph& g, std::span<const CategoryId> direct) {
    auto seeds = detail::checked_direct(g, direct);
    std::vector<char> seen(g.node_count(), 0);
    std::vector<CategoryId> stack = seeds;
    for (auto c : seeds) seen[c.value] = 1;
    std::vector<CategoryId> out;
    while (!stack.empty()) {
        auto c = stack.back();
        stack.pop_back();
        out.push_back(c);
        for (auto p : g.parents(c)) {
            if (seen[p.value]) continue;
            seen[p.value] = 1;
            stack.push_back(p);
        }
    }
    bool root_direct = std::binary_search(seeds.begin(), seeds.end(), g.root());
    if (!root_direct) std::erase(out, g.root());
    std::sort(out.begin(), out.end());
    return out;
}

/// Mean length, in edges, over all downward paths from each member of
/// `among` to any member of `direct` (paths through one direct category
/// into another are counted too). Direct categories map to 0.
/// `among` must be a subset of ancestors(g, direct).
inline std::vector<double> avg_steps_down_all(const CategoryGraph& g, std::span<const CategoryId> among,
                                              std::span<const CategoryId> direct) {
    auto seeds = detail::checked_direct(g, direct);
    auto in_a = ancestors(g, seeds);
    std::unordered_map<std::uint32_t, std::size_t> local;
    local.reserve(in_a.size());
    for (std::size_t i = 0; i < in_a.size(); ++i) local.emplace(in_a[i].value, i);
    for (auto c : among)
        if (!local.contains(c.value))
            throw Error("category " + std::to_string(c.value) + " is not an ancestor of the direct set");

    // Every node on a downward path toward a direct category is itself in
    // A, so a memoised post-order walk restricted to A covers all paths.
    std::vector<detail::PathTotals> totals(in_a.size());
    std::vector<char> done(in_a.size(), 0);
    auto is_direct = [&](CategoryId c) { return std::binary_search(seeds.begin(), seeds.end(), c); };
    for (std::size_t start = 0; start < in_a.size(); ++start) {
        if (done[start]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            auto kids = g.children(in_a[node]);
            while (next < kids.size()) {
                auto it = local.find(kids[next].value);
                if (it != local.end() && !done[it->second]) break;
                ++next;
            }
            if (next < kids.size()) {
                stack.emplace_back(local.at(kids[next].value), 0);
                continue;
            }
            detail::PathTotals t;
            if (is_direct(in_a[node])) t.paths = 1;
            for (auto k : kids) {
                auto it = local.find(k.value);
                if (it == local.end()) continue;
                const auto& kt = totals[it->second];
                t.paths += kt.paths;
                t.length += kt.length + kt.paths;
            }
            totals[node] = t;
            done[node] = 1;
            stack.pop_back();
        }
    }

    std::vector<double> out;
    out.reserve(among.size());
    for (auto c : among) {
        if (is_direct(c)) {
            out.push_back(0.0);
            continue;
        }
        const auto& t = totals[local.at(c.value)];
        out.push_back(static_cast<double>(t.length / t.paths));
    }
    return out;
}

inline double avg_steps_down(const CategoryGraph& g, CategoryId from, std::span<const CategoryId> direct) {
    CategoryId one[] = {from};
    return avg_steps_down_all(g, one, direct).front();
}

/// HCE weights over A(e): raw_i = 1 / (1 + avg steps down), normalised to
/// sum to one. Ordered by increasing distance, then by index.
inline AncestorWeights category_weights(const CategoryGraph& g, std::span<const CategoryId> direct) {
    auto cats = ancestors(g, direct);
    auto steps = avg_steps_down_all(g, cats, direct);
    std::vector<std::size_t> order(cats.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });

    AncestorWeights out;
    out.reserve(cats.size());
    double total = 0.0;
    for (auto i : order) {
        double raw = 1.0 / (1.0 + steps[i]);
        out.push_back({cats[i], raw});
        total += raw;
    }
    for (auto& w : out) w.weight /= total;
    return out;
}

/// CE mode: every direct category with weight exactly 1.
inline AncestorWeights ce_weights(std::span<const CategoryId> direct) {
    if (direct.empty()) throw Error("ce_weights: direct category set is empty");
    AncestorWeights out;
    for (auto c : direct) {
        bool dup = std::any_of(out.begin(), out.end(), [&](const WeightedCategory& w) { return w.category == c; });
        if (!dup) out.push_back({c, 1.0});
    }
    return out;
}

/// Per-entity weight lists, computed once from the graph's labeling.
/// Unlabeled entities get an empty list.
class WeightCache {
public:
    WeightCache() = default;

    WeightCache(const CategoryGraph& g, std::size_t entity_count, Mode mode) : weights_(entity_count) {
        for (std::size_t i = 0; i < entity_count; ++i) {
            auto direct = g.entity_categories(EntityId{static_cast<std::uint32_t>(i)});
            if (direct.empty()) continue;
            weights_[i] = mode == Mode::HCE ? category_weights(g, direct) : ce_weights(direct);
        }
    }

    std::span<const WeightedCategory> operator[](EntityId e) const { return weights_.at(e.value); }
    std::size_t size() const { return weights_.size(); }

private:
    std::vector<AncestorWeights> weights_;
};

}  // namespace hce
