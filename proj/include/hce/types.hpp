#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hce {

/// Error raised by every module on invalid input or a violated precondition.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strongly typed dense index. Entities and categories live in separate,
/// contiguous index spaces, so the tag keeps them from being mixed up.
template <class Tag>
struct Index {
    std::uint32_t value = 0;

    constexpr Index() = default;
    constexpr explicit Index(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(Index, Index) = default;
};

using EntityId = Index<struct EntityTag>;
using CategoryId = Index<struct CategoryTag>;

enum class NodeKind : std::uint8_t { Entity, Category };

struct NodeId {
    NodeKind kind = NodeKind::Entity;
    std::uint32_t index = 0;

    static constexpr NodeId entity(EntityId e) { return {NodeKind::Entity, e.value}; }
    static constexpr NodeId category(CategoryId c) { return {NodeKind::Category, c.value}; }

    friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline std::string_view kind_prefix(NodeKind kind) {
    return kind == NodeKind::Entity ? "e:" : "c:";
}

}  // namespace hce

template <class Tag>
struct std::hash<hce::Index<Tag>> {
    std::size_t operator()(hce::Index<Tag> i) const noexcept { return std::hash<std::uint32_t>{}(i.value); }
};
