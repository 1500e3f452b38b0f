#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hce/types.hpp"

namespace hce {

namespace detail {
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};
using LabelMap = std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>;
}  // namespace detail

/// Label <-> index tables for entities and categories. Indices are dense and
/// assigned in insertion order, separately per kind.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::uint64_t min_count) : min_count_(min_count) {}

    /// Adds an entity, or returns the existing id for the label.
    EntityId add_entity(std::string_view label, std::uint64_t count = 0) {
        if (auto it = entity_index_.find(label); it != entity_index_.end()) {
            entity_counts_[it->second] += count;
            return EntityId{it->second};
        }
        auto id = static_cast<std::uint32_t>(entity_labels_.size());
        entity_labels_.emplace_back(label);
        entity_counts_.push_back(count);
        entity_index_.emplace(std::string(label), id);
        return EntityId{id};
    }

    CategoryId add_category(std::string_view label) {
        if (auto it = category_index_.find(label); it != category_index_.end()) return CategoryId{it->second};
        auto id = static_cast<std::uint32_t>(category_labels_.size());
        category_labels_.emplace_back(label);
        category_index_.emplace(std::string(label), id);
        return CategoryId{id};
    }

    std::optional<EntityId> find_entity(std::string_view label) const {
        if (auto it = entity_index_.find(label); it != entity_index_.end()) return EntityId{it->second};
        return std::nullopt;
    }

    std::optional<CategoryId> find_category(std::string_view label) const {
        if (auto it = category_index_.find(label); it != category_index_.end()) return CategoryId{it->second};
        return std::nullopt;
    }

    const std::string& label(EntityId e) const { return entity_labels_.at(e.value); }
    const std::string& label(CategoryId c) const { return category_labels_.at(c.value); }
    const std::string& label(NodeId n) const {
        return n.kind == NodeKind::Entity ? label(EntityId{n.index}) : label(CategoryId{n.index});
    }

    std::uint64_t count(EntityId e) const { return entity_counts_.at(e.value); }
    std::span<const std::uint64_t> entity_counts() const { return entity_counts_; }

    std::size_t entity_size() const { return entity_labels_.size(); }
    std::size_t category_size() const { return category_labels_.size(); }

    std::span<const std::string> entity_labels() const { return entity_labels_; }
    std::span<const std::string> category_labels() const { return category_labels_; }

    std::uint64_t min_count() const { return min_count_; }

private:
    std::uint64_t min_count_ = 1;
    std::vector<std::string> entity_labels_;
    std::vector<std::uint64_t> entity_counts_;
    detail::LabelMap entity_index_;
    std::vector<std::string> category_labels_;
    detail::LabelMap category_index_;
};

}  // namespace hce
