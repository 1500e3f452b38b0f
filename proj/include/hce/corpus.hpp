#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hce/detail/text.hpp"
#include "hce/types.hpp"
#include "hce/vocabulary.hpp"

namespace hce {

// ---------------------------------------------------------------------------
// Corpus file parsing
//
// One document per line:
//   target<TAB>cat1,cat2,...<TAB>ctx1 ctx2 ...
// The context field may be empty or absent. Blank lines are ignored.
// ---------------------------------------------------------------------------

struct RawDocument {
    std::size_t line = 0;
    std::string target;
    std::vector<std::string> labels;
    std::vector<std::string> contexts;
};

inline RawDocument parse_document_line(std::string_view line, std::size_t line_no) {
    auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3)
        detail::fail_at("corpus", line_no, "expected 2 or 3 tab-separated fields, got " + std::to_string(fields.size()));
    RawDocument doc;
    doc.line = line_no;
    doc.target = std::string(detail::trim(fields[0]));
    if (doc.target.empty() || doc.target.find(' ') != std::string::npos)
        detail::fail_at("corpus", line_no, "invalid target label");
    for (auto cat : detail::split(fields[1], ',')) {
        cat = detail::trim(cat);
        if (cat.empty()) detail::fail_at("corpus", line_no, "empty category label");
        doc.labels.emplace_back(cat);
    }
    if (fields.size() == 3)
        for (auto ctx : detail::split_words(fields[2])) doc.contexts.emplace_back(ctx);
    return doc;
}

inline std::vector<RawDocument> parse_corpus(std::istream& in) {
    std::vector<RawDocument> docs;
    detail::for_each_line(in, [&](std::size_t n, std::string_view line) {
        if (detail::trim(line).empty()) return;
        docs.push_back(parse_document_line(line, n));
    });
    return docs;
}

/// Counts target + context occurrences per entity and keeps those with at
/// least min_count. Every category named in a label list is kept.
inline Vocabulary build_vocabulary(std::span<const RawDocument> docs, std::uint64_t min_count = 1) {
    if (docs.empty()) throw Error("build_vocabulary: corpus is empty");
    Vocabulary counting;
    for (const auto& d : docs) {
        counting.add_entity(d.target, 1);
        for (const auto& c : d.contexts) counting.add_entity(c, 1);
    }
    Vocabulary vocab(min_count);
    for (std::size_t i = 0; i < counting.entity_size(); ++i) {
        EntityId e{static_cast<std::uint32_t>(i)};
        if (counting.count(e) >= min_count) vocab.add_entity(counting.label(e), counting.count(e));
    }
    for (const auto& d : docs)
        for (const auto& c : d.labels) vocab.add_category(c);
    return vocab;
}

inline Vocabulary build_vocabulary(std::istream& in, std::uint64_t min_count = 1) {
    auto docs = parse_corpus(in);
    return build_vocabulary(docs, min_count);
}

// ---------------------------------------------------------------------------
// Hierarchy
// ---------------------------------------------------------------------------

/// Directed graph over category indices with duplicate edges collapsed.
/// Child lists are kept sorted ascending.
class DirectedGraph {
public:
    DirectedGraph() = default;
    explicit DirectedGraph(std::size_t nodes) : children_(nodes) {}

    void resize(std::size_t nodes) {
        if (nodes > children_.size()) children_.resize(nodes);
    }

    /// Returns false if the edge already existed.
    bool add_edge(CategoryId parent, CategoryId child) {
        resize(std::max(parent.value, child.value) + std::size_t{1});
        auto& kids = children_[parent.value];
        auto it = std::lower_bound(kids.begin(), kids.end(), child);
        if (it != kids.end() && *it == child) return false;
        kids.insert(it, child);
        ++edges_;
        return true;
    }

    std::size_t node_count() const { return children_.size(); }
    std::size_t edge_count() const { return edges_; }
    std::span<const CategoryId> children(CategoryId c) const { return children_.at(c.value); }

    friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

private:
    std::vector<std::vector<CategoryId>> children_;
    std::size_t edges_ = 0;
};

/// Reads `parent<TAB>child` edges. Unknown labels are added to the vocabulary
/// as categories. The graph spans every category in the vocabulary.
inline DirectedGraph load_hierarchy(std::istream& in, Vocabulary& vocab) {
    DirectedGraph g(vocab.category_size());
    detail::for_each_line(in, [&](std::size_t n, std::string_view line) {
        if (detail::trim(line).empty()) return;
        auto fields = detail::split(line, '\t');
        if (fields.size() != 2) detail::fail_at("hierarchy", n, "expected parent<TAB>child");
        auto parent = detail::trim(fields[0]);
        auto child = detail::trim(fields[1]);
        if (parent.empty() || child.empty()) detail::fail_at("hierarchy", n, "empty label");
        if (parent == child) detail::fail_at("hierarchy", n, "self-loop on '" + std::string(parent) + "'");
        auto p = vocab.add_category(parent);
        auto c = vocab.add_category(child);
        g.add_edge(p, c);
    });
    g.resize(vocab.category_size());
    return g;
}

/// Validated category DAG plus the entity -> direct category labeling.
/// Category ids are those of the vocabulary; pruned categories stay in the
/// index space but are marked absent and have no edges.
class CategoryGraph {
public:
    CategoryGraph() = default;

    CategoryGraph(std::size_t nodes, CategoryId root)
        : children_(nodes), parents_(nodes), present_(nodes, 1), root_(root) {}

    std::size_t node_count() const { return children_.size(); }
    std::size_t edge_count() const { return edges_; }
    CategoryId root() const { return root_; }

    bool contains(CategoryId c) const { return c.value < present_.size() && present_[c.value] != 0; }

    std::span<const CategoryId> children(CategoryId c) const { return children_.at(c.value); }
    std::span<const CategoryId> parents(CategoryId c) const { return parents_.at(c.value); }

    std::size_t present_count() const {
        return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), 1));
    }

    /// Direct categories of an entity; empty for unlabeled entities.
    std::span<const CategoryId> entity_categories(EntityId e) const {
        if (e.value >= entity_labels_.size()) return {};
        return entity_labels_[e.value];
    }
    std::size_t labeled_entity_span() const { return entity_labels_.size(); }

    /// Merges labels into the entity's direct category set.
    void add_entity_labels(EntityId e, std::span<const CategoryId> cats) {
        if (e.value >= entity_labels_.size()) entity_labels_.resize(e.value + std::size_t{1});
        auto& mine = entity_labels_[e.value];
        for (auto c : cats) {
            if (!contains(c)) throw Error("entity label references a category outside the graph");
            auto it = std::lower_bound(mine.begin(), mine.end(), c);
            if (it == mine.end() || *it != c) mine.insert(it, c);
        }
    }

    friend bool operator==(const CategoryGraph&, const CategoryGraph&) = default;

    DirectedGraph to_directed() const {
        DirectedGraph g(node_count());
        for (std::size_t i = 0; i < children_.size(); ++i)
            for (auto c : children_[i]) g.add_edge(CategoryId{static_cast<std::uint32_t>(i)}, c);
        return g;
    }

    // Mutators used while building; children lists stay sorted.
    void add_edge(CategoryId parent, CategoryId child) {
        auto& kids = children_[parent.value];
        kids.insert(std::lower_bound(kids.begin(), kids.end(), child), child);
        auto& ps = parents_[child.value];
        ps.insert(std::lower_bound(ps.begin(), ps.end(), parent), parent);
        ++edges_;
    }
    void set_present(CategoryId c, bool on) { present_[c.value] = on ? 1 : 0; }

private:
    std::vector<std::vector<CategoryId>> children_;
    std::vector<std::vector<CategoryId>> parents_;
    std::vector<char> present_;
    CategoryId root_{};
    std::size_t edges_ = 0;
    std::vector<std::vector<CategoryId>> entity_labels_;
};

/// Kahn's algorithm over present nodes; nullopt if a cycle remains.
inline std::optional<std::vector<CategoryId>> topological_order(const CategoryGraph& g) {
    std::vector<std::size_t> indeg(g.node_count(), 0);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        for (auto c : g.children(CategoryId{static_cast<std::uint32_t>(i)})) ++indeg[c.value];
    std::vector<CategoryId> order, ready;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CategoryId c{static_cast<std::uint32_t>(i)};
        if (g.contains(c) && indeg[i] == 0) ready.push_back(c);
    }
    while (!ready.empty()) {
        auto c = ready.back();
        ready.pop_back();
        order.push_back(c);
        for (auto k : g.children(c))
            if (--indeg[k.value] == 0) ready.push_back(k);
    }
    if (order.size() != g.present_count()) return std::nullopt;
    return order;
}

struct PruneStats {
    std::size_t pattern_nodes_removed = 0;
    std::size_t unreachable_nodes_removed = 0;
    std::size_t edges_removed_with_nodes = 0;
    std::size_t back_edges_removed = 0;
};

struct PrunedHierarchy {
    CategoryGraph graph;
    PruneStats stats;
};

/// Produces a rooted DAG: drops categories whose label contains any of
/// drop_patterns, drops everything unreachable from the root, then deletes
/// back edges found by a DFS from the root that visits children in
/// ascending index order.
inline PrunedHierarchy prune_to_dag(const DirectedGraph& raw, const Vocabulary& vocab, std::string_view root_label,
                                    std::span<const std::string> drop_patterns = {}) {
    auto root = vocab.find_category(root_label);
    if (!root || root->value >= raw.node_count())
        throw Error("prune_to_dag: root category '" + std::string(root_label) + "' not in hierarchy");
    auto dropped = [&](CategoryId c) {
        const auto& label = c.value < vocab.category_size() ? vocab.label(c) : std::string{};
        return std::any_of(drop_patterns.begin(), drop_patterns.end(), [&](const std::string& p) {
            return !p.empty() && label.find(p) != std::string::npos;
        });
    };
    if (dropped(*root)) throw Error("prune_to_dag: root category matches a drop pattern");

    const std::size_t n = raw.node_count();
    PruneStats stats;
    std::vector<char> alive(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (dropped(CategoryId{static_cast<std::uint32_t>(i)})) {
            alive[i] = 0;
            ++stats.pattern_nodes_removed;
        }
    }

    // Iterative DFS from root. state: 0 unvisited, 1 on stack, 2 finished.
    std::vector<char> state(n, 0);
    std::vector<std::pair<CategoryId, CategoryId>> kept;
    struct Frame {
        CategoryId node;
        std::size_t next;
    };
    std::vector<Frame> stack{{*root, 0}};
    state[root->value] = 1;
    while (!stack.empty()) {
        auto& top = stack.back();
        auto kids = raw.children(top.node);
        if (top.next == kids.size()) {
            state[top.node.value] = 2;
            stack.pop_back();
            continue;
        }
        auto child = kids[top.next++];
        if (!alive[child.value]) continue;
        if (state[child.value] == 1) {
            ++stats.back_edges_removed;
            continue;
        }
        kept.emplace_back(top.node, child);
        if (state[child.value] == 0) {
            state[child.value] = 1;
            stack.push_back({child, 0});
        }
    }

    CategoryGraph g(n, *root);
    for (std::size_t i = 0; i < n; ++i) {
        bool reachable = state[i] != 0;
        if (alive[i] && !reachable) ++stats.unreachable_nodes_removed;
        g.set_present(CategoryId{static_cast<std::uint32_t>(i)}, alive[i] && reachable);
    }
    for (auto [p, c] : kept) g.add_edge(p, c);
    // Everything not kept and not a back edge touched a removed node.
    stats.edges_removed_with_nodes = raw.edge_count() - kept.size() - stats.back_edges_removed;
    return {std::move(g), stats};
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

struct Document {
    EntityId target;
    std::vector<CategoryId> labels;
    std::vector<EntityId> contexts;
};

struct CorpusStats {
    std::size_t documents_read = 0;
    std::size_t skipped_target_oov = 0;
    std::size_t skipped_no_labels = 0;
    std::size_t contexts_dropped = 0;
    std::size_t labels_dropped = 0;
};

struct Corpus {
    std::vector<Document> documents;
    CorpusStats stats;

    std::size_t pair_count() const {
        std::size_t n = 0;
        for (const auto& d : documents) n += d.contexts.size();
        return n;
    }
};

/// Resolves documents against the vocabulary and graph and records each
/// surviving target's labels in the graph's entity labeling.
inline Corpus load_corpus(std::span<const RawDocument> raw, const Vocabulary& vocab, CategoryGraph& graph) {
    Corpus corpus;
    for (const auto& r : raw) {
        ++corpus.stats.documents_read;
        auto target = vocab.find_entity(r.target);
        if (!target) {
            ++corpus.stats.skipped_target_oov;
            continue;
        }
        Document doc;
        doc.target = *target;
        for (const auto& l : r.labels) {
            auto c = vocab.find_category(l);
            if (!c || !graph.contains(*c) || std::find(doc.labels.begin(), doc.labels.end(), *c) != doc.labels.end()) {
                if (!c || !graph.contains(*c)) ++corpus.stats.labels_dropped;
                continue;
            }
            doc.labels.push_back(*c);
        }
        if (doc.labels.empty()) {
            ++corpus.stats.skipped_no_labels;
            continue;
        }
        doc.contexts.reserve(r.contexts.size());
        for (const auto& ctx : r.contexts) {
            if (auto e = vocab.find_entity(ctx)) doc.contexts.push_back(*e);
            else ++corpus.stats.contexts_dropped;
        }
        graph.add_entity_labels(doc.target, doc.labels);
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty()) throw Error("load_corpus: no documents survived filtering");
    return corpus;
}

inline Corpus load_corpus(std::istream& in, const Vocabulary& vocab, CategoryGraph& graph) {
    auto raw = parse_corpus(in);
    return load_corpus(raw, vocab, graph);
}

}  // namespace hce
