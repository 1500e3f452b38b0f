#pragma once

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hce/cluster.hpp"
#include "hce/detail/text.hpp"
#include "hce/embedding.hpp"
#include "hce/lexicon.hpp"
#include "hce/types.hpp"

namespace hce {

struct GoldRow {
    std::string entity;
    std::string category;
};

/// `entity<TAB>category` per line; blank lines skipped.
inline std::vector<GoldRow> parse_gold(std::istream& in) {
    std::vector<GoldRow> rows;
    detail::for_each_line(in, [&](std::size_t n, std::string_view line) {
        if (detail::trim(line).empty()) return;
        auto f = detail::split(line, '\t');
        if (f.size() != 2) detail::fail_at("gold", n, "expected entity<TAB>category");
        auto e = detail::trim(f[0]), c = detail::trim(f[1]);
        if (e.empty() || c.empty()) detail::fail_at("gold", n, "empty label");
        rows.push_back({std::string(e), std::string(c)});
    });
    return rows;
}

/// Gold concept -> class assignment with every entity listed once.
class GoldLabeling {
public:
    GoldLabeling() = default;

    /// Identical repeated rows are collapsed (and counted); an entity listed
    /// under two different classes is an error.
    static GoldLabeling from_rows(std::span<const GoldRow> rows) {
        GoldLabeling g;
        std::map<std::string, std::size_t> entity_pos;
        for (const auto& r : rows) {
            std::size_t cls = g.intern_class(r.category);
            auto [it, fresh] = entity_pos.emplace(r.entity, g.entities_.size());
            if (!fresh) {
                if (g.class_of_[it->second] != cls)
                    throw Error("gold: entity '" + r.entity + "' is listed under two categories");
                ++g.duplicates_;
                continue;
            }
            g.entities_.push_back(r.entity);
            g.class_of_.push_back(cls);
        }
        return g;
    }

    std::size_t size() const { return entities_.size(); }
    std::size_t class_count() const { return classes_.size(); }
    std::span<const std::string> entities() const { return entities_; }
    std::span<const std::size_t> classes() const { return class_of_; }
    std::span<const std::string> class_labels() const { return classes_; }
    std::size_t duplicates_collapsed() const { return duplicates_; }

private:
    std::size_t intern_class(const std::string& label) {
        auto it = std::find(classes_.begin(), classes_.end(), label);
        if (it != classes_.end()) return static_cast<std::size_t>(it - classes_.begin());
        classes_.push_back(label);
        return classes_.size() - 1;
    }

    std::vector<std::string> entities_;
    std::vector<std::size_t> class_of_;
    std::vector<std::string> classes_;
    std::size_t duplicates_ = 0;
};

/// (1/n) sum over clusters of the largest overlap with any gold class.
inline double purity(const ClusteringSolution& s, std::span<const std::size_t> gold) {
    if (s.assignment.size() != gold.size()) throw Error("purity: solution and gold cover different items");
    if (gold.empty()) throw Error("purity: no items");
    std::size_t n_classes = *std::max_element(gold.begin(), gold.end()) + 1;
    std::vector<std::size_t> overlap(s.k * n_classes, 0);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (s.assignment[i] >= s.k) throw Error("purity: cluster index out of range");
        ++overlap[s.assignment[i] * n_classes + gold[i]];
    }
    std::size_t hit = 0;
    for (std::size_t c = 0; c < s.k; ++c)
        hit += *std::max_element(overlap.begin() + static_cast<std::ptrdiff_t>(c * n_classes),
                                 overlap.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_classes));
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

inline double purity(const ClusteringSolution& s, const GoldLabeling& gold) { return purity(s, gold.classes()); }

/// Position of the candidate nearest in euclidean distance; ties go to the
/// earliest candidate.
inline std::size_t nn_classify(std::span<const double> entity, std::span<const std::span<const double>> candidates) {
    if (candidates.empty()) throw Error("nn_classify: no candidates");
    std::size_t best = 0;
    double bd = squared_distance(entity, candidates[0]);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        double d = squared_distance(entity, candidates[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

/// Nearest candidate category; ties go to the lowest category index.
inline CategoryId nn_classify(const VectorStore& store, std::span<const double> entity,
                              std::span<const CategoryId> candidates) {
    std::vector<CategoryId> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::span<const double>> vecs;
    vecs.reserve(sorted.size());
    for (auto c : sorted) vecs.push_back(store.vector(c));
    return sorted[nn_classify(entity, vecs)];
}

// ---------------------------------------------------------------------------
// Categorization runs
// ---------------------------------------------------------------------------

enum class CategorizeMethod { Cluster, NN, Both };

inline CategorizeMethod parse_categorize_method(std::string_view s) {
    if (s == "cluster") return CategorizeMethod::Cluster;
    if (s == "nn") return CategorizeMethod::NN;
    if (s == "both") return CategorizeMethod::Both;
    throw Error("invalid method '" + std::string(s) + "' (expected cluster, nn or both)");
}

struct CategorizeSweep {
    bool use_kmeans = true;
    bool use_agglomerative = true;
    std::vector<Metric> metrics{Metric::Euclidean, Metric::Cosine};
    std::vector<Linkage> linkages{Linkage::Ward, Linkage::Complete, Linkage::Average};
    std::size_t restarts = 10;
    std::size_t max_iters = 300;
    std::uint64_t seed = 1;
};

struct SweepEntry {
    std::string algorithm;
    Metric metric = Metric::Euclidean;
    std::optional<Linkage> linkage;
    double purity = 0.0;

    std::string key() const {
        return algorithm + "/" + to_string(metric) + (linkage ? "/" + to_string(*linkage) : std::string{});
    }
};

struct Misclassification {
    std::string entity;
    std::string gold;
    std::string predicted;
};

struct ClusterReport {
    std::vector<SweepEntry> entries;
    std::size_t best = 0;
    ClusteringSolution best_solution;
    std::vector<Misclassification> misclassified;

    double best_purity() const { return entries.at(best).purity; }
};

struct NnReport {
    double purity = 0.0;
    double accuracy = 0.0;
    std::size_t evaluated = 0;
    std::vector<std::string> excluded_entities;
    std::vector<Misclassification> misclassified;
    /// How many items were assigned to each candidate; a candidate far
    /// above its gold share is a hub.
    std::vector<std::pair<std::string, std::size_t>> predicted_counts;
};

struct CategorizationReport {
    std::size_t gold_total = 0;
    std::size_t gold_duplicates = 0;
    std::vector<std::string> class_labels;
    std::vector<std::string> excluded_entities;
    std::vector<std::string> missing_categories;
    std::optional<ClusterReport> cluster;
    std::optional<NnReport> nn;
};

namespace detail {

inline std::vector<SweepEntry> sweep_grid(const CategorizeSweep& sweep) {
    std::vector<SweepEntry> grid;
    for (auto m : sweep.metrics) {
        if (sweep.use_kmeans) grid.push_back({"kmeans", m, std::nullopt, 0.0});
        if (sweep.use_agglomerative)
            for (auto l : sweep.linkages)
                if (!(l == Linkage::Ward && m != Metric::Euclidean)) grid.push_back({"agglomerative", m, l, 0.0});
    }
    std::sort(grid.begin(), grid.end(), [](const SweepEntry& a, const SweepEntry& b) { return a.key() < b.key(); });
    return grid;
}

/// Majority gold class per cluster; ties go to the lowest class index.
inline std::vector<std::size_t> majority_classes(const ClusteringSolution& s, std::span<const std::size_t> gold,
                                                 std::size_t n_classes) {
    std::vector<std::size_t> overlap(s.k * n_classes, 0);
    for (std::size_t i = 0; i < gold.size(); ++i) ++overlap[s.assignment[i] * n_classes + gold[i]];
    std::vector<std::size_t> major(s.k, 0);
    for (std::size_t c = 0; c < s.k; ++c)
        for (std::size_t j = 1; j < n_classes; ++j)
            if (overlap[c * n_classes + j] > overlap[c * n_classes + major[c]]) major[c] = j;
    return major;
}

}  // namespace detail

/// Scores a vector store against gold labels by clustering (sweeping the
/// configured algorithms and reporting the best purity, with k equal to
/// the number of gold classes) and/or by nearest-category classification.
/// Gold entities or categories missing from the store are listed and left
/// out of scoring.
inline CategorizationReport run_categorization(const VectorStore& store, const GoldLabeling& gold,
                                               CategorizeMethod method, const CategorizeSweep& sweep = {}) {
    CategorizationReport report;
    report.gold_total = gold.size();
    report.gold_duplicates = gold.duplicates_collapsed();
    report.class_labels.assign(gold.class_labels().begin(), gold.class_labels().end());
    const LexicalMatcher matcher(store.vocab());

    std::vector<EntityId> ids;
    std::vector<std::size_t> classes;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto e = matcher.entity(gold.entities()[i]);
        if (!e) {
            report.excluded_entities.push_back(gold.entities()[i]);
            continue;
        }
        ids.push_back(*e);
        classes.push_back(gold.classes()[i]);
        names.push_back(gold.entities()[i]);
    }
    if (ids.empty()) throw Error("categorization: no gold entity has a vector");
    const std::size_t n_classes = gold.class_count();

    if (method != CategorizeMethod::NN) {
        std::vector<char> seen(n_classes, 0);
        for (auto c : classes) seen[c] = 1;
        const auto k = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
        if (k < 2) throw Error("categorization: clustering needs at least two gold classes");
        PointMatrix pts(store.dim());
        for (auto e : ids) pts.add(store.vector(e));

        ClusterReport cr;
        cr.entries = detail::sweep_grid(sweep);
        if (cr.entries.empty()) throw Error("categorization: empty clustering sweep");
        double best = -1.0;
        for (std::size_t i = 0; i < cr.entries.size(); ++i) {
            auto& entry = cr.entries[i];
            ClusteringSolution sol =
                entry.algorithm == "kmeans"
                    ? kmeans(pts, {k, entry.metric, sweep.restarts, sweep.max_iters, sweep.seed}).solution
                    : agglomerative(pts, k, entry.metric, *entry.linkage);
            entry.purity = purity(sol, classes);
            if (entry.purity > best) {
                best = entry.purity;
                cr.best = i;
                cr.best_solution = std::move(sol);
            }
        }
        auto major = detail::majority_classes(cr.best_solution, classes, n_classes);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto pred = major[cr.best_solution.assignment[i]];
            if (pred != classes[i])
                cr.misclassified.push_back({names[i], report.class_labels[classes[i]], report.class_labels[pred]});
        }
        report.cluster = std::move(cr);
    }

    if (method != CategorizeMethod::Cluster) {
        std::vector<std::optional<CategoryId>> class_vec(n_classes);
        std::vector<CategoryId> candidates;
        for (std::size_t c = 0; c < n_classes; ++c) {
            class_vec[c] = matcher.category(report.class_labels[c]);
            if (class_vec[c]) candidates.push_back(*class_vec[c]);
            else report.missing_categories.push_back(report.class_labels[c]);
        }
        if (candidates.empty()) throw Error("categorization: no gold category has a vector");
        std::sort(candidates.begin(), candidates.end());

        NnReport nr;
        std::vector<std::size_t> nn_gold, predicted_class;
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!class_vec[classes[i]]) {
                nr.excluded_entities.push_back(names[i]);
                continue;
            }
            CategoryId pred = nn_classify(store, store.vector(ids[i]), candidates);
            std::size_t pc = 0;
            while (class_vec[pc] != pred) ++pc;
            nn_gold.push_back(classes[i]);
            predicted_class.push_back(pc);
            ++counts[pc];
            if (pc != classes[i])
                nr.misclassified.push_back({names[i], report.class_labels[classes[i]], report.class_labels[pc]});
        }
        if (nn_gold.empty()) throw Error("categorization: no entity left for nearest-neighbour scoring");
        nr.evaluated = nn_gold.size();
        ClusteringSolution as_clusters{predicted_class, n_classes};
        nr.purity = purity(as_clusters, nn_gold);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < nn_gold.size(); ++i) correct += nn_gold[i] == predicted_class[i];
        nr.accuracy = static_cast<double>(correct) / static_cast<double>(nn_gold.size());
        for (std::size_t c = 0; c < n_classes; ++c)
            if (class_vec[c]) nr.predicted_counts.emplace_back(report.class_labels[c], counts[c]);
        report.nn = std::move(nr);
    }
    return report;
}

}  // namespace hce
