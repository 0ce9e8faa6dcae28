#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "regmdp/bounding.hpp"
#include "regmdp/mdp.hpp"

namespace regmdp {

using json = nlohmann::json;

/// Raised on malformed config / fixture files; message carries the offending
/// field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic float formatting for CSV output: shortest-general form with
/// 17 significant digits, '.' decimal, locale-independent.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Compact form for human-facing output (describe, logs).
inline std::string format_short(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

namespace io_detail {

inline const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(ctx + ": missing required field '" + key + "'");
    return j.at(key);
}

inline double as_double(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
    return j.get<double>();
}

inline double field_double(const json& j, const std::string& key, const std::string& ctx) {
    return as_double(require_field(j, key, ctx), ctx + "." + key);
}

inline double field_double_or(const json& j, const std::string& key, double fallback,
                              const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as_double(j.at(key), ctx + "." + key);
}

inline long field_int(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer");
    return v.get<long>();
}

inline long field_int_or(const json& j, const std::string& key, long fallback,
                         const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw ConfigError(ctx + "." + key + ": expected an integer");
    return j.at(key).get<long>();
}

inline std::string field_string(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_string()) throw ConfigError(ctx + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool field_bool_or(const json& j, const std::string& key, bool fallback,
                          const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(ctx + "." + key + ": expected a boolean");
    return j.at(key).get<bool>();
}

}  // namespace io_detail

/// Tagged-record form used in config files, e.g.
/// {"type":"clip","scale":10,"lo":-1,"hi":1} or {"type":"tdclip","T1":1000000,"T2":10}.
inline BoundingFn bounding_from_json(const json& j, const std::string& ctx) {
    using namespace io_detail;
    const std::string type = field_string(j, "type", ctx);
    if (type == "identity") return BoundingFn::identity();
    if (type == "zero") return BoundingFn::zero();
    if (type == "sign") return BoundingFn::sign_fn();
    if (type == "clip")
        return BoundingFn::clip(field_double_or(j, "scale", 1.0, ctx), field_double(j, "lo", ctx),
                                field_double(j, "hi", ctx));
    if (type == "tanh") return BoundingFn::tanh_fn(field_double_or(j, "scale", 1.0, ctx));
    if (type == "tdclip")
        return BoundingFn::time_dependent_clip(field_double(j, "T1", ctx),
                                               field_double(j, "T2", ctx));
    throw ConfigError(ctx + ".type: unknown bounding function '" + type + "'");
}

inline json bounding_to_json(const BoundingFn& fn) {
    switch (fn.variant) {
        case BoundingFn::Variant::kIdentity: return {{"type", "identity"}};
        case BoundingFn::Variant::kZero: return {{"type", "zero"}};
        case BoundingFn::Variant::kSign: return {{"type", "sign"}};
        case BoundingFn::Variant::kClip:
            return {{"type", "clip"}, {"scale", fn.scale}, {"lo", fn.lo}, {"hi", fn.hi}};
        case BoundingFn::Variant::kTanh: return {{"type", "tanh"}, {"scale", fn.scale}};
        case BoundingFn::Variant::kTimeDependentClip:
            return {{"type", "tdclip"}, {"T1", fn.t1}, {"T2", fn.t2}};
    }
    return {{"type", "identity"}};
}

/// Shape-tagged JSON layout for MDP fixtures:
/// transition {"shape":[S,A,S],"data":[...]} row-major, reward {"shape":[S,A],...}.
inline json mdp_to_json(const TabularMdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["discount"] = mdp.discount;
    j["r_max"] = mdp.r_max;
    j["transition"] = {{"shape", {mdp.num_states, mdp.num_actions, mdp.num_states}},
                       {"data", mdp.transition}};
    j["reward"] = {{"shape", {mdp.num_states, mdp.num_actions}}, {"data", mdp.reward.values}};
    return j;
}

inline TabularMdp mdp_from_json(const json& j, const std::string& ctx = "mdp") {
    using namespace io_detail;
    TabularMdp mdp;
    mdp.num_states = static_cast<int>(field_int(j, "num_states", ctx));
    mdp.num_actions = static_cast<int>(field_int(j, "num_actions", ctx));
    mdp.discount = field_double(j, "discount", ctx);
    mdp.r_max = field_double(j, "r_max", ctx);
    const json& tr = require_field(j, "transition", ctx);
    const json& rw = require_field(j, "reward", ctx);
    const auto check_shape = [&](const json& node, std::vector<long> want, const std::string& c) {
        const json& shape = require_field(node, "shape", c);
        if (!shape.is_array() || shape.size() != want.size())
            throw ConfigError(c + ".shape: wrong rank");
        for (std::size_t i = 0; i < want.size(); ++i)
            if (shape[i].get<long>() != want[i]) throw ConfigError(c + ".shape: mismatch");
    };
    check_shape(tr, {mdp.num_states, mdp.num_actions, mdp.num_states}, ctx + ".transition");
    check_shape(rw, {mdp.num_states, mdp.num_actions}, ctx + ".reward");
    mdp.transition = require_field(tr, "data", ctx + ".transition").get<std::vector<double>>();
    mdp.reward = QTable(mdp.num_states, mdp.num_actions);
    mdp.reward.values = require_field(rw, "data", ctx + ".reward").get<std::vector<double>>();
    if (mdp.transition.size() !=
        static_cast<std::size_t>(mdp.num_states) * mdp.num_actions * mdp.num_states)
        throw ConfigError(ctx + ".transition.data: wrong length");
    if (mdp.reward.values.size() != static_cast<std::size_t>(mdp.num_states) * mdp.num_actions)
        throw ConfigError(ctx + ".reward.data: wrong length");
    validate_mdp(mdp);
    return mdp;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace regmdp
