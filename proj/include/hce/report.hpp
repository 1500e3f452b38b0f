#pragma once

#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hce/categorize.hpp"
#include "hce/relatedness.hpp"
#include "json.hpp"

namespace hce {

using json = nlohmann::json;

namespace detail {

inline json misclassified_json(const std::vector<Misclassification>& items) {
    json arr = json::array();
    for (const auto& m : items) arr.push_back({{"entity", m.entity}, {"gold", m.gold}, {"predicted", m.predicted}});
    return arr;
}

/// predicted category -> entities wrongly assigned to it
inline std::map<std::string, std::vector<std::string>> by_predicted(const std::vector<Misclassification>& items) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& m : items) out[m.predicted].push_back(m.entity);
    return out;
}

inline std::string joined_or_dash(const std::vector<std::string>& v) {
    if (v.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
}

}  // namespace detail

inline json to_json(const CategorizationReport& r) {
    json j;
    j["gold_total"] = r.gold_total;
    j["gold_duplicates_collapsed"] = r.gold_duplicates;
    j["excluded_entities"] = r.excluded_entities;
    j["excluded_count"] = r.excluded_entities.size();
    j["missing_categories"] = r.missing_categories;
    if (r.cluster) {
        json c;
        json entries = json::array();
        for (const auto& e : r.cluster->entries)
            entries.push_back({{"algorithm", e.algorithm},
                               {"metric", to_string(e.metric)},
                               {"linkage", e.linkage ? json(to_string(*e.linkage)) : json(nullptr)},
                               {"purity", e.purity}});
        c["sweep"] = entries;
        c["best"] = r.cluster->entries.at(r.cluster->best).key();
        c["best_purity"] = r.cluster->best_purity();
        c["misclassified"] = detail::misclassified_json(r.cluster->misclassified);
        j["cluster"] = c;
    }
    if (r.nn) {
        json n;
        n["purity"] = r.nn->purity;
        n["accuracy"] = r.nn->accuracy;
        n["evaluated"] = r.nn->evaluated;
        n["excluded_entities"] = r.nn->excluded_entities;
        n["misclassified"] = detail::misclassified_json(r.nn->misclassified);
        json counts = json::object();
        for (const auto& [label, count] : r.nn->predicted_counts) counts[label] = count;
        n["predicted_counts"] = counts;
        j["nn"] = n;
    }
    return j;
}

/// Summary plus a per-category table of misclassified entities, listed
/// under the category they were wrongly assigned to.
inline void write_text(std::ostream& out, const CategorizationReport& r) {
    out << "gold entities: " << r.gold_total << " (duplicates collapsed: " << r.gold_duplicates << ")\n";
    out << "excluded (no vector): " << r.excluded_entities.size();
    if (!r.excluded_entities.empty()) out << " [" << detail::joined_or_dash(r.excluded_entities) << "]";
    out << '\n';
    if (!r.missing_categories.empty())
        out << "categories without a vector: " << detail::joined_or_dash(r.missing_categories) << '\n';
    out << std::fixed << std::setprecision(4);
    if (r.cluster) {
        out << "\nclustering sweep:\n";
        for (const auto& e : r.cluster->entries) out << "  " << std::left << std::setw(34) << e.key() << e.purity << '\n';
        out << "best: " << r.cluster->entries.at(r.cluster->best).key() << " purity " << r.cluster->best_purity()
            << '\n';
    }
    if (r.nn) {
        out << "\nnearest-neighbour: purity " << r.nn->purity << " accuracy " << r.nn->accuracy << " over "
            << r.nn->evaluated << " entities\n";
        if (!r.nn->excluded_entities.empty())
            out << "  excluded (gold category has no vector): " << r.nn->excluded_entities.size() << '\n';
    }
    auto cl = r.cluster ? detail::by_predicted(r.cluster->misclassified) : std::map<std::string, std::vector<std::string>>{};
    auto nn = r.nn ? detail::by_predicted(r.nn->misclassified) : std::map<std::string, std::vector<std::string>>{};
    out << "\nmisclassified entities by assigned category\n";
    out << "category\tclustering\tnn\n";
    for (const auto& c : r.class_labels) {
        out << c << '\t' << (r.cluster ? detail::joined_or_dash(cl[c]) : std::string("n/a")) << '\t'
            << (r.nn ? detail::joined_or_dash(nn[c]) : std::string("n/a")) << '\n';
    }
    if (r.nn) {
        out << "\nitems assigned per category (nn)\n";
        for (const auto& [label, count] : r.nn->predicted_counts) out << label << '\t' << count << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

inline json to_json(const RelatednessReport& r) {
    json pairs = json::array();
    for (const auto& p : r.mapping.pairs)
        pairs.push_back({{"word1", p.pair.word1},
                         {"word2", p.pair.word2},
                         {"human", p.pair.score},
                         {"word1_resolution", to_string(p.first)},
                         {"word2_resolution", to_string(p.second)},
                         {"model", p.model_score ? json(*p.model_score) : json(nullptr)}});
    return {{"dataset", r.dataset},
            {"rho", r.rho},
            {"total", r.mapping.total},
            {"mapped", r.mapping.mapped},
            {"unmapped", r.mapping.unmapped},
            {"pairs", pairs}};
}

inline void write_text(std::ostream& out, const RelatednessReport& r) {
    out << r.dataset << ": spearman " << std::fixed << std::setprecision(4) << r.rho << " over " << r.mapping.mapped
        << " of " << r.mapping.total << " pairs (" << r.mapping.unmapped << " dropped)\n";
    out.unsetf(std::ios::floatfield);
    for (const auto& p : r.mapping.pairs) {
        if (p.model_score) continue;
        out << "  dropped: " << p.pair.word1 << " (" << to_string(p.first) << ") / " << p.pair.word2 << " ("
            << to_string(p.second) << ")\n";
    }
}

}  // namespace hce
