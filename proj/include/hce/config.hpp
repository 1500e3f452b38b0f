#pragma once

#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hce/detail/text.hpp"
#include "hce/embedding.hpp"
#include "hce/synthetic.hpp"
#include "hce/trainer.hpp"

namespace hce {

/// Everything a pipeline run depends on. Stored as `key=value` lines; `#`
/// starts a comment.
struct RunConfig {
    TrainConfig train;
    std::string corpus;
    std::string hierarchy;
    std::string output;
    std::string embeddings;
    std::string gold;
    std::vector<std::string> datasets;
    std::string root = "root";
    std::vector<std::string> drop_patterns;
    std::uint64_t min_count = 1;
    std::string format = "text";
    std::string method = "both";
    std::size_t restarts = 10;
    std::size_t max_iters = 300;
    int verbosity = 1;
    /// Shape of the toy world written by gen-synthetic; its seed is train.seed.
    SyntheticSpec synthetic;

    friend bool operator==(const RunConfig& a, const RunConfig& b);
};

namespace detail {

struct ConfigField {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

inline std::string join(const std::vector<std::string>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error("not a boolean: '" + std::string(s) + "'");
}

template <class Int>
ConfigField int_field(std::string key, Int RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return std::to_string(c.*member); },
            [member, key](RunConfig& c, std::string_view v) { c.*member = parse_int<Int>(v, key); }};
}

template <class Int>
ConfigField train_int_field(std::string key, Int TrainConfig::*member) {
    return {key, [member](const RunConfig& c) { return std::to_string(c.train.*member); },
            [member, key](RunConfig& c, std::string_view v) { c.train.*member = parse_int<Int>(v, key); }};
}

inline ConfigField train_double_field(std::string key, double TrainConfig::*member) {
    return {key, [member](const RunConfig& c) { return format_double(c.train.*member); },
            [member, key](RunConfig& c, std::string_view v) { c.train.*member = parse_double(v, key); }};
}

inline ConfigField string_field(std::string key, std::string RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, std::string_view v) { c.*member = std::string(trim(v)); }};
}

inline ConfigField list_field(std::string key, std::vector<std::string> RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return join(c.*member, ','); },
            [member](RunConfig& c, std::string_view v) { c.*member = split_list(v); }};
}

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = {
        string_field("corpus", &RunConfig::corpus),
        string_field("hierarchy", &RunConfig::hierarchy),
        string_field("output", &RunConfig::output),
        string_field("embeddings", &RunConfig::embeddings),
        string_field("gold", &RunConfig::gold),
        list_field("datasets", &RunConfig::datasets),
        string_field("root", &RunConfig::root),
        list_field("drop_patterns", &RunConfig::drop_patterns),
        int_field("min_count", &RunConfig::min_count),
        string_field("format", &RunConfig::format),
        {"mode", [](const RunConfig& c) { return to_string(c.train.mode); },
         [](RunConfig& c, std::string_view v) { c.train.mode = parse_mode(trim(v)); }},
        train_int_field("dim", &TrainConfig::dim),
        train_int_field("epochs", &TrainConfig::epochs),
        train_double_field("lr0", &TrainConfig::lr0),
        train_double_field("lr_min", &TrainConfig::lr_min),
        train_int_field("negatives", &TrainConfig::negatives),
        train_int_field("chunk", &TrainConfig::chunk),
        train_double_field("alpha", &TrainConfig::noise_exponent),
        train_int_field("seed", &TrainConfig::seed),
        train_int_field("workers", &TrainConfig::workers),
        {"shuffle", [](const RunConfig& c) { return std::string(c.train.shuffle ? "true" : "false"); },
         [](RunConfig& c, std::string_view v) { c.train.shuffle = parse_bool(v); }},
        train_double_field("subsample", &TrainConfig::subsample),
        train_int_field("checkpoint_every", &TrainConfig::checkpoint_every),
        string_field("method", &RunConfig::method),
        int_field("restarts", &RunConfig::restarts),
        int_field("max_iters", &RunConfig::max_iters),
        int_field("verbosity", &RunConfig::verbosity),
        {"branching",
         [](const RunConfig& c) {
             std::string out;
             for (std::size_t i = 0; i < c.synthetic.branching.size(); ++i)
                 out += (i ? "," : "") + std::to_string(c.synthetic.branching[i]);
             return out;
         },
         [](RunConfig& c, std::string_view v) {
             c.synthetic.branching.clear();
             for (const auto& part : split_list(v)) c.synthetic.branching.push_back(parse_int<std::size_t>(part, "branching"));
         }},
        {"entities_per_leaf", [](const RunConfig& c) { return std::to_string(c.synthetic.entities_per_leaf); },
         [](RunConfig& c, std::string_view v) { c.synthetic.entities_per_leaf = parse_int<std::size_t>(v, "entities_per_leaf"); }},
        {"p_in", [](const RunConfig& c) { return format_double(c.synthetic.p_in); },
         [](RunConfig& c, std::string_view v) { c.synthetic.p_in = parse_double(v, "p_in"); }},
        {"docs", [](const RunConfig& c) { return std::to_string(c.synthetic.docs); },
         [](RunConfig& c, std::string_view v) { c.synthetic.docs = parse_int<std::size_t>(v, "docs"); }},
        {"contexts_per_doc", [](const RunConfig& c) { return std::to_string(c.synthetic.contexts_per_doc); },
         [](RunConfig& c, std::string_view v) { c.synthetic.contexts_per_doc = parse_int<std::size_t>(v, "contexts_per_doc"); }},
    };
    return fields;
}

}  // namespace detail

inline void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
    for (const auto& f : detail::config_fields()) {
        if (f.key == key) {
            f.set(c, value);
            return;
        }
    }
    throw Error("config: unknown key '" + std::string(key) + "'");
}

inline std::string get_config_value(const RunConfig& c, std::string_view key) {
    for (const auto& f : detail::config_fields())
        if (f.key == key) return f.get(c);
    throw Error("config: unknown key '" + std::string(key) + "'");
}

inline void write_config(std::ostream& out, const RunConfig& c) {
    for (const auto& f : detail::config_fields()) out << f.key << '=' << f.get(c) << '\n';
}

/// Applies `key=value` lines on top of `base`.
inline RunConfig read_config(std::istream& in, RunConfig base = {}) {
    detail::for_each_line(in, [&](std::size_t n, std::string_view line) {
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') return;
        auto eq = t.find('=');
        if (eq == std::string_view::npos) detail::fail_at("config", n, "expected key=value");
        try {
            set_config_value(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        } catch (const Error& e) {
            detail::fail_at("config", n, e.what());
        }
    });
    return base;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
    for (const auto& f : detail::config_fields())
        if (f.get(a) != f.get(b)) return false;
    return true;
}

inline VectorFormat parse_format(std::string_view s) {
    if (s == "text") return VectorFormat::Text;
    if (s == "binary") return VectorFormat::Binary;
    throw Error("invalid format '" + std::string(s) + "' (expected text or binary)");
}

}  // namespace hce
