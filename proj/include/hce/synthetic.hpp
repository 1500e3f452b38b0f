#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hce/random.hpp"
#include "hce/types.hpp"

namespace hce {

/// Shape of a seeded toy knowledge base. `branching[l]` is the fan-out at
/// depth l below the root, so {3, 1} is three root children with one leaf
/// each and {2, 3} is two parents with three leaves each.
struct SyntheticSpec {
    std::vector<std::size_t> branching{3, 1};
    std::size_t entities_per_leaf = 10;
    double p_in = 0.9;
    std::size_t docs = 200;
    std::size_t contexts_per_doc = 20;
    std::uint64_t seed = 1;
    std::string root = "root";
};

struct SyntheticCategory {
    std::string label;
    std::size_t depth = 0;  // 1 = child of the root
    std::vector<std::size_t> leaves;  // indices into SyntheticWorld::leaves
};

struct SyntheticWorld {
    std::string corpus;     // corpus file contents
    std::string hierarchy;  // hierarchy file contents
    std::string gold;       // gold file contents (entity -> leaf)
    std::vector<SyntheticCategory> categories;
    std::vector<std::string> leaves;
    std::vector<std::string> entities;
    std::vector<std::size_t> entity_leaf;
};

/// Documents cycle through the entities as targets; each context is a
/// same-leaf entity with probability p_in, otherwise an entity of another
/// leaf, both uniform.
inline SyntheticWorld generate_synthetic(const SyntheticSpec& spec) {
    if (spec.branching.empty()) throw Error("synthetic: branching needs at least one level");
    for (auto b : spec.branching)
        if (b == 0) throw Error("synthetic: branching factors must be positive");
    if (spec.entities_per_leaf == 0) throw Error("synthetic: entities_per_leaf must be positive");
    if (spec.docs == 0) throw Error("synthetic: docs must be positive");
    if (!(spec.p_in >= 0.0 && spec.p_in <= 1.0)) throw Error("synthetic: p_in must lie in [0, 1]");

    SyntheticWorld w;
    struct Pending {
        std::string label;
        std::size_t depth;
        std::vector<std::size_t> ancestors;  // indices into w.categories
    };
    std::vector<Pending> frontier{{spec.root, 0, {}}};
    for (std::size_t level = 0; level < spec.branching.size(); ++level) {
        std::vector<Pending> next;
        for (const auto& parent : frontier) {
            for (std::size_t b = 0; b < spec.branching[level]; ++b) {
                std::string label = level == 0 ? "c" + std::to_string(b) : parent.label + "_" + std::to_string(b);
                w.hierarchy += parent.label + "\t" + label + "\n";
                auto anc = parent.ancestors;
                anc.push_back(w.categories.size());
                w.categories.push_back({label, level + 1, {}});
                next.push_back({label, level + 1, std::move(anc)});
            }
        }
        frontier = std::move(next);
    }
    for (const auto& leaf : frontier) {
        std::size_t li = w.leaves.size();
        w.leaves.push_back(leaf.label);
        for (auto a : leaf.ancestors) w.categories[a].leaves.push_back(li);
        for (std::size_t j = 0; j < spec.entities_per_leaf; ++j) {
            std::string e = "e" + leaf.label.substr(1) + "_" + std::to_string(j);
            w.entities.push_back(e);
            w.entity_leaf.push_back(li);
            w.gold += e + "\t" + leaf.label + "\n";
        }
    }

    Rng rng(spec.seed, 0x5E);
    const std::size_t n = w.entities.size(), per = spec.entities_per_leaf;
    for (std::size_t d = 0; d < spec.docs; ++d) {
        std::size_t t = d % n;
        std::size_t leaf = w.entity_leaf[t];
        std::string line = w.entities[t] + "\t" + w.leaves[leaf] + "\t";
        for (std::size_t c = 0; c < spec.contexts_per_doc; ++c) {
            std::size_t pick;
            bool inside = w.leaves.size() == 1 || rng.uniform() < spec.p_in;
            if (inside) {
                if (per == 1) {
                    pick = t;
                } else {
                    std::size_t j = rng.below(per - 1);
                    pick = leaf * per + j;
                    if (pick >= t) ++pick;
                }
            } else {
                std::size_t j = rng.below(n - per);
                pick = j < leaf * per ? j : j + per;
            }
            if (c) line += ' ';
            line += w.entities[pick];
        }
        w.corpus += line + "\n";
    }
    return w;
}

}  // namespace hce
