#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "hce/detail/text.hpp"
#include "hce/types.hpp"
#include "hce/vocabulary.hpp"

namespace hce {

/// Exact lexical matching of free-form words onto vocabulary labels.
/// Tries the label verbatim, then a case-folded, space/underscore
/// normalised key. A normalised key shared by several labels is ambiguous
/// and never matches.
class LexicalMatcher {
public:
    explicit LexicalMatcher(const Vocabulary& vocab) : vocab_(&vocab) {
        for (std::uint32_t i = 0; i < vocab.entity_size(); ++i) insert(entities_, vocab.label(EntityId{i}), i);
        for (std::uint32_t i = 0; i < vocab.category_size(); ++i) insert(categories_, vocab.label(CategoryId{i}), i);
    }

    std::optional<EntityId> entity(std::string_view word) const {
        if (auto e = vocab_->find_entity(word)) return e;
        if (auto i = lookup(entities_, word)) return EntityId{*i};
        return std::nullopt;
    }

    std::optional<CategoryId> category(std::string_view word) const {
        if (auto c = vocab_->find_category(word)) return c;
        if (auto i = lookup(categories_, word)) return CategoryId{*i};
        return std::nullopt;
    }

    /// Entity first; a category only when no entity matches.
    std::optional<NodeId> node(std::string_view word) const {
        if (auto e = entity(word)) return NodeId::entity(*e);
        if (auto c = category(word)) return NodeId::category(*c);
        return std::nullopt;
    }

private:
    static constexpr std::uint32_t kAmbiguous = std::numeric_limits<std::uint32_t>::max();
    using KeyMap = std::unordered_map<std::string, std::uint32_t>;

    static void insert(KeyMap& m, std::string_view label, std::uint32_t id) {
        auto [it, fresh] = m.emplace(detail::normalize_label(label), id);
        if (!fresh && it->second != id) it->second = kAmbiguous;
    }

    static std::optional<std::uint32_t> lookup(const KeyMap& m, std::string_view word) {
        auto it = m.find(detail::normalize_label(word));
        if (it == m.end() || it->second == kAmbiguous) return std::nullopt;
        return it->second;
    }

    const Vocabulary* vocab_;
    KeyMap entities_;
    KeyMap categories_;
};

inline std::optional<NodeId> map_word_to_node(std::string_view word, const Vocabulary& vocab) {
    return LexicalMatcher(vocab).node(word);
}

}  // namespace hce
