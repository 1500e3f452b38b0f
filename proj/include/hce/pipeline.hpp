#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "hce/corpus.hpp"
#include "hce/vocabulary.hpp"

namespace hce {

/// Vocabulary, pruned hierarchy and resolved corpus, ready for training.
struct TrainingWorld {
    Vocabulary vocab;
    CategoryGraph graph;
    Corpus corpus;
    PruneStats prune;
};

inline TrainingWorld load_world(std::istream& corpus_in, std::istream& hierarchy_in, std::string_view root,
                                std::span<const std::string> drop_patterns = {}, std::uint64_t min_count = 1) {
    auto raw = parse_corpus(corpus_in);
    TrainingWorld w;
    w.vocab = build_vocabulary(raw, min_count);
    auto edges = load_hierarchy(hierarchy_in, w.vocab);
    auto pruned = prune_to_dag(edges, w.vocab, root, drop_patterns);
    w.graph = std::move(pruned.graph);
    w.prune = pruned.stats;
    w.corpus = load_corpus(raw, w.vocab, w.graph);
    return w;
}

}  // namespace hce
