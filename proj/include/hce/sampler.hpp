#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hce/corpus.hpp"
#include "hce/random.hpp"
#include "hce/types.hpp"
#include "hce/vocabulary.hpp"

namespace hce {

struct TrainingPair {
    EntityId target;
    EntityId context;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// One (target, context) pair per context occurrence, in document order.
template <class Fn>
void for_each_pair(const Corpus& corpus, Fn&& fn) {
    for (const auto& doc : corpus.documents)
        for (auto ctx : doc.contexts) fn(TrainingPair{doc.target, ctx});
}

inline std::vector<TrainingPair> generate_pairs(const Corpus& corpus) {
    if (corpus.documents.empty()) throw Error("generate_pairs: corpus is empty");
    std::vector<TrainingPair> out;
    out.reserve(corpus.pair_count());
    for_each_pair(corpus, [&](TrainingPair p) { out.push_back(p); });
    return out;
}

/// Unigram^alpha noise distribution over entity indices, sampled by binary
/// search over the cumulative table.
class NoiseTable {
public:
    NoiseTable() = default;

    NoiseTable(std::span<const std::uint64_t> counts, double alpha) : alpha_(alpha) {
        cumulative_.resize(counts.size());
        double total = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            total += counts[i] > 0 ? std::pow(static_cast<double>(counts[i]), alpha) : 0.0;
            cumulative_[i] = total;
        }
        if (!(total > 0.0)) throw Error("noise table: no entity has a positive count");
        for (auto& c : cumulative_) c /= total;
        // Absorb rounding so the last bucket always closes at exactly 1.
        for (std::size_t i = cumulative_.size(); i-- > 0;) {
            if (counts[i] == 0) continue;
            for (std::size_t j = i; j < cumulative_.size(); ++j) cumulative_[j] = 1.0;
            break;
        }
    }

    std::size_t size() const { return cumulative_.size(); }
    double alpha() const { return alpha_; }
    std::span<const double> cumulative() const { return cumulative_; }

    double probability(EntityId e) const {
        double lo = e.value == 0 ? 0.0 : cumulative_.at(e.value - 1);
        return cumulative_.at(e.value) - lo;
    }

    EntityId sample(Rng& rng) const {
        double u = rng.uniform();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return EntityId{static_cast<std::uint32_t>(it - cumulative_.begin())};
    }

private:
    std::vector<double> cumulative_;
    double alpha_ = 0.75;
};

inline NoiseTable build_noise_table(const Vocabulary& vocab, double alpha) {
    return NoiseTable(vocab.entity_counts(), alpha);
}

/// Appends k draws to `out`, redrawing any that hit `exclude`.
inline void draw_negatives_into(const NoiseTable& table, std::size_t k, EntityId exclude, Rng& rng,
                                std::vector<EntityId>& out) {
    if (k == 0) throw Error("draw_negatives: k must be at least 1");
    if (table.size() < 2) throw Error("draw_negatives: need at least two entities to exclude one");
    if (exclude.value < table.size() && table.probability(exclude) >= 1.0)
        throw Error("draw_negatives: excluded entity carries all noise mass");
    for (std::size_t i = 0; i < k; ++i) {
        EntityId e;
        do e = table.sample(rng);
        while (e == exclude);
        out.push_back(e);
    }
}

inline std::vector<EntityId> draw_negatives(const NoiseTable& table, std::size_t k, EntityId exclude, Rng& rng) {
    std::vector<EntityId> out;
    out.reserve(k);
    draw_negatives_into(table, k, exclude, rng, out);
    return out;
}

/// Draws with no exclusion; used by the distribution checks.
inline std::vector<EntityId> draw_unconstrained(const NoiseTable& table, std::size_t k, Rng& rng) {
    std::vector<EntityId> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(table.sample(rng));
    return out;
}

}  // namespace hce
