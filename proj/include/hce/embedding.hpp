#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hce/corpus.hpp"
#include "hce/detail/text.hpp"
#include "hce/random.hpp"
#include "hce/types.hpp"
#include "hce/vocabulary.hpp"

namespace hce {

enum class Table : std::uint8_t { EntityInput, CategoryInput, EntityOutput };

struct RowRef {
    Table table = Table::EntityInput;
    std::uint32_t row = 0;

    friend bool operator==(const RowRef&, const RowRef&) = default;
};

/// Input vectors for every entity and category, output vectors for
/// entities only. Storage is allocated once; rows never move, so workers
/// may hold spans into it for the whole of training.
class EmbeddingTable {
public:
    EmbeddingTable() = default;

    EmbeddingTable(std::size_t dim, std::size_t entities, std::size_t categories)
        : dim_(dim),
          entities_(entities),
          categories_(categories),
          entity_in_(dim * entities, 0.0),
          category_in_(dim * categories, 0.0),
          entity_out_(dim * entities, 0.0) {}

    std::size_t dim() const { return dim_; }
    std::size_t entity_count() const { return entities_; }
    std::size_t category_count() const { return categories_; }

    std::size_t rows(Table t) const { return t == Table::CategoryInput ? categories_ : entities_; }

    std::span<double> row(RowRef r) { return {storage(r.table).data() + offset(r), dim_}; }
    std::span<const double> row(RowRef r) const { return {storage(r.table).data() + offset(r), dim_}; }

    std::span<double> data(Table t) { return storage(t); }
    std::span<const double> data(Table t) const { return storage(t); }

    /// Relaxed atomic copy of a row. Safe while other threads update it;
    /// the copy may mix old and new components.
    void load(RowRef r, std::span<double> out) const {
        auto* p = const_cast<double*>(storage(r.table).data() + offset(r));
        for (std::size_t i = 0; i < dim_; ++i) out[i] = std::atomic_ref<double>(p[i]).load(std::memory_order_relaxed);
    }

    /// row += scale * delta, component-wise with relaxed atomics. Concurrent
    /// writers may lose each other's updates but never tear a value.
    void add_scaled(RowRef r, std::span<const double> delta, double scale) {
        double* p = storage(r.table).data() + offset(r);
        for (std::size_t i = 0; i < dim_; ++i) {
            std::atomic_ref<double> a(p[i]);
            a.store(a.load(std::memory_order_relaxed) + scale * delta[i], std::memory_order_relaxed);
        }
    }

    /// Copy taken with relaxed loads; used for checkpoints during training.
    EmbeddingTable snapshot() const {
        EmbeddingTable copy(dim_, entities_, categories_);
        for (auto t : {Table::EntityInput, Table::CategoryInput, Table::EntityOutput}) {
            auto src = storage(t);
            auto& dst = copy.storage(t);
            for (std::size_t i = 0; i < src.size(); ++i)
                dst[i] = std::atomic_ref<double>(const_cast<double&>(src[i])).load(std::memory_order_relaxed);
        }
        return copy;
    }

    bool all_finite() const {
        for (auto t : {Table::EntityInput, Table::CategoryInput, Table::EntityOutput})
            for (double v : storage(t))
                if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

private:
    std::size_t offset(RowRef r) const {
        if (r.row >= rows(r.table)) throw Error("embedding row out of range");
        return static_cast<std::size_t>(r.row) * dim_;
    }
    std::vector<double>& storage(Table t) {
        return t == Table::EntityInput ? entity_in_ : t == Table::CategoryInput ? category_in_ : entity_out_;
    }
    const std::vector<double>& storage(Table t) const {
        return t == Table::EntityInput ? entity_in_ : t == Table::CategoryInput ? category_in_ : entity_out_;
    }

    std::size_t dim_ = 0;
    std::size_t entities_ = 0;
    std::size_t categories_ = 0;
    std::vector<double> entity_in_;
    std::vector<double> category_in_;
    std::vector<double> entity_out_;
};

/// Input rows uniform in [-0.5/d, 0.5/d]; output rows zero.
inline EmbeddingTable init_embeddings(std::size_t dim, std::size_t entities, std::size_t categories,
                                      std::uint64_t seed) {
    if (dim == 0) throw Error("init_embeddings: dim must be at least 1");
    if (entities == 0) throw Error("init_embeddings: need at least one entity");
    EmbeddingTable t(dim, entities, categories);
    Rng rng(seed, 0xE1);
    double half = 0.5 / static_cast<double>(dim);
    for (auto& v : t.data(Table::EntityInput)) v = rng.uniform(-half, half);
    for (auto& v : t.data(Table::CategoryInput)) v = rng.uniform(-half, half);
    return t;
}

// ---------------------------------------------------------------------------
// Exported vectors
// ---------------------------------------------------------------------------

/// Labeled input vectors as exported after training; the unit every
/// evaluation works on.
class VectorStore {
public:
    VectorStore() = default;
    explicit VectorStore(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    const Vocabulary& vocab() const { return vocab_; }
    std::size_t size() const { return vocab_.entity_size() + vocab_.category_size(); }

    EntityId add_entity(std::string_view label, std::span<const double> v) {
        check(v, label);
        auto id = vocab_.add_entity(label);
        if (id.value * dim_ != entity_.size()) throw Error("duplicate entity label in vector store: " + std::string(label));
        entity_.insert(entity_.end(), v.begin(), v.end());
        return id;
    }

    CategoryId add_category(std::string_view label, std::span<const double> v) {
        check(v, label);
        auto id = vocab_.add_category(label);
        if (id.value * dim_ != category_.size())
            throw Error("duplicate category label in vector store: " + std::string(label));
        category_.insert(category_.end(), v.begin(), v.end());
        return id;
    }

    std::span<const double> vector(EntityId e) const { return {entity_.data() + e.value * dim_, dim_}; }
    std::span<const double> vector(CategoryId c) const { return {category_.data() + c.value * dim_, dim_}; }
    std::span<const double> vector(NodeId n) const {
        return n.kind == NodeKind::Entity ? vector(EntityId{n.index}) : vector(CategoryId{n.index});
    }

    /// Node ids in export order: entities first, then categories.
    std::vector<NodeId> nodes() const {
        std::vector<NodeId> out;
        out.reserve(size());
        for (std::uint32_t i = 0; i < vocab_.entity_size(); ++i) out.push_back({NodeKind::Entity, i});
        for (std::uint32_t i = 0; i < vocab_.category_size(); ++i) out.push_back({NodeKind::Category, i});
        return out;
    }

    friend bool operator==(const VectorStore& a, const VectorStore& b) {
        if (a.dim_ != b.dim_ || a.entity_ != b.entity_ || a.category_ != b.category_) return false;
        auto al = a.vocab_.entity_labels(), bl = b.vocab_.entity_labels();
        auto ac = a.vocab_.category_labels(), bc = b.vocab_.category_labels();
        return std::equal(al.begin(), al.end(), bl.begin(), bl.end()) &&
               std::equal(ac.begin(), ac.end(), bc.begin(), bc.end());
    }

private:
    void check(std::span<const double> v, std::string_view label) const {
        if (v.size() != dim_) throw Error("vector for '" + std::string(label) + "' has wrong dimension");
    }

    std::size_t dim_ = 0;
    Vocabulary vocab_;
    std::vector<double> entity_;
    std::vector<double> category_;
};

/// Input vectors of every entity and of every category present in the
/// graph. Output vectors are dropped.
inline VectorStore export_vectors(const EmbeddingTable& table, const Vocabulary& vocab, const CategoryGraph& graph) {
    VectorStore store(table.dim());
    for (std::uint32_t i = 0; i < vocab.entity_size(); ++i)
        store.add_entity(vocab.label(EntityId{i}), table.row({Table::EntityInput, i}));
    for (std::uint32_t i = 0; i < vocab.category_size(); ++i) {
        CategoryId c{i};
        if (graph.contains(c)) store.add_category(vocab.label(c), table.row({Table::CategoryInput, i}));
    }
    return store;
}

enum class VectorFormat { Text, Binary };

namespace detail {

inline void write_header(std::ostream& out, const VectorStore& s) { out << s.size() << ' ' << s.dim() << '\n'; }

template <class Fn>
void for_each_exported(const VectorStore& s, Fn&& fn) {
    for (auto n : s.nodes()) {
        std::string label(kind_prefix(n.kind));
        label += s.vocab().label(n);
        // Rows are space-delimited, so spaces inside labels become '_'.
        std::replace(label.begin(), label.end(), ' ', '_');
        fn(label, s.vector(n));
    }
}

}  // namespace detail

/// `<rows> <dim>` header, then `<e:|c:label> v1 ... vd` with %.6g values.
inline void write_text(std::ostream& out, const VectorStore& s) {
    detail::write_header(out, s);
    char buf[32];
    detail::for_each_exported(s, [&](const std::string& label, std::span<const double> v) {
        out << label;
        for (double x : v) {
            std::snprintf(buf, sizeof buf, " %.6g", x);
            out << buf;
        }
        out << '\n';
    });
}

/// Same header; each row is `<label> ` followed by dim little-endian
/// float32 values and a newline.
inline void write_binary(std::ostream& out, const VectorStore& s) {
    detail::write_header(out, s);
    detail::for_each_exported(s, [&](const std::string& label, std::span<const double> v) {
        out << label << ' ';
        for (double x : v) {
            auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
            unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                      static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
            out.write(reinterpret_cast<const char*>(bytes), 4);
        }
        out << '\n';
    });
}

inline void write_vectors(std::ostream& out, const VectorStore& s, VectorFormat f) {
    if (f == VectorFormat::Text) write_text(out, s);
    else write_binary(out, s);
}

namespace detail {

inline std::pair<std::size_t, std::size_t> read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("embeddings: missing header");
    auto parts = split_words(strip_cr(line));
    if (parts.size() != 2) throw Error("embeddings: header must be '<rows> <dim>'");
    auto rows = parse_int<std::size_t>(parts[0], "embeddings header");
    auto dim = parse_int<std::size_t>(parts[1], "embeddings header");
    if (dim == 0) throw Error("embeddings: dim must be positive");
    return {rows, dim};
}

inline void add_row(VectorStore& s, std::string_view label, std::span<const double> v, std::size_t line) {
    if (label.size() < 3 || label[1] != ':' || (label[0] != 'e' && label[0] != 'c'))
        fail_at("embeddings", line, "label must start with e: or c:");
    if (label[0] == 'e') s.add_entity(label.substr(2), v);
    else s.add_category(label.substr(2), v);
}

}  // namespace detail

inline VectorStore read_text(std::istream& in) {
    auto [rows, dim] = detail::read_header(in);
    VectorStore s(dim);
    std::vector<double> v(dim);
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw Error("embeddings: expected " + std::to_string(rows) + " rows");
        auto parts = detail::split_words(detail::strip_cr(line));
        if (parts.size() != dim + 1) detail::fail_at("embeddings", r + 2, "wrong number of values");
        for (std::size_t i = 0; i < dim; ++i) v[i] = detail::parse_double(parts[i + 1], "embeddings");
        detail::add_row(s, parts[0], v, r + 2);
    }
    return s;
}

inline VectorStore read_binary(std::istream& in) {
    auto [rows, dim] = detail::read_header(in);
    VectorStore s(dim);
    std::vector<double> v(dim);
    for (std::size_t r = 0; r < rows; ++r) {
        std::string label;
        if (!std::getline(in, label, ' ')) throw Error("embeddings: truncated binary file");
        for (std::size_t i = 0; i < dim; ++i) {
            unsigned char b[4];
            if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("embeddings: truncated binary row");
            std::uint32_t bits = b[0] | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
                                 (std::uint32_t{b[3]} << 24);
            v[i] = std::bit_cast<float>(bits);
        }
        if (in.get() != '\n') throw Error("embeddings: binary row not newline-terminated");
        detail::add_row(s, label, v, r + 2);
    }
    return s;
}

inline VectorStore read_vectors(std::istream& in, VectorFormat f) {
    return f == VectorFormat::Text ? read_text(in) : read_binary(in);
}

}  // namespace hce
