#pragma once

// JSON configuration documents:
//
//   {
//     "link":      {"family": "sigmoid", "alpha": 1, "beta": 0,
//                   "extra": {"c": 1, "delta": 1, "breakpoints": [...], "levels": [...]}},
//     "transform": {"family": "sinh", "alpha": 1, "beta": 0, "gamma": 1,
//                   "extra": {"c": 1, "degree": 2, "shift": 2}},
//     "domain":    {"min": -5, "max": 5, "points": 4096},
//     "experiment": {...}
//   }
//
// "link" and "transform" are mutually exclusive. Unknown keys are errors.

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "composite.hpp"
#include "core.hpp"
#include "link.hpp"
#include "recipes.hpp"
#include "validity.hpp"

namespace selective {

class ConfigError : public Error {
public:
    using Error::Error;
};

using Json = nlohmann::ordered_json;

struct ExperimentOptions {
    std::optional<double> learning_rate;
    std::optional<std::size_t> iterations;
    std::optional<int> low_repeat;
    std::optional<int> high_repeat;
    std::optional<std::vector<double>> alphas;
    std::optional<std::vector<double>> observed;
    std::optional<double> kappa;
    std::optional<double> delta;
};

struct ConfigDocument {
    std::optional<LinkSpec> link;
    std::optional<TransformSpec> transform;
    std::optional<ScoreDomain> domain;
    ExperimentOptions experiment;
};

namespace detail {

inline void reject_unknown(const Json& obj, std::string_view where,
                           std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || item.key() == a;
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

inline double get_number(const Json& obj, const char* key, std::string_view where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> get_numbers(const Json& v, std::string_view where) {
    if (!v.is_array()) throw ConfigError(std::string(where) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(std::string(where) + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline std::string get_family(const Json& obj, std::string_view where) {
    if (!obj.contains("family")) throw ConfigError(std::string(where) + ": missing key 'family'");
    if (!obj.at("family").is_string()) throw ConfigError(std::string(where) + ".family: expected a string");
    return obj.at("family").get<std::string>();
}

inline std::size_t get_count(const Json& v, std::string_view where) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw ConfigError(std::string(where) + ": expected a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

inline LinkSpec link_from_json(const Json& j) {
    detail::reject_unknown(j, "link", {"family", "alpha", "beta", "extra"});
    const std::string name = detail::get_family(j, "link");
    const auto fam = link_family_from_string(name);
    if (!fam) throw ConfigError("link.family: unknown family '" + name + "'");
    LinkSpec s;
    s.family = *fam;
    s.alpha = detail::get_number(j, "alpha", "link", 1.0);
    s.beta = detail::get_number(j, "beta", "link", 0.0);
    if (s.family == LinkFamily::staircase) s.stairs = LinkSpec::make(LinkFamily::staircase).stairs;
    if (j.contains("extra")) {
        const Json& e = j.at("extra");
        detail::reject_unknown(e, "link.extra", {"c", "delta", "breakpoints", "levels"});
        s.smelu_c = detail::get_number(e, "c", "link.extra", s.smelu_c);
        s.huber_delta = detail::get_number(e, "delta", "link.extra", s.huber_delta);
        if (e.contains("breakpoints")) s.stairs.breakpoints = detail::get_numbers(e.at("breakpoints"), "link.extra.breakpoints");
        if (e.contains("levels")) s.stairs.levels = detail::get_numbers(e.at("levels"), "link.extra.levels");
    }
    s.validate();
    return s;
}

inline TransformSpec transform_from_json(const Json& j) {
    detail::reject_unknown(j, "transform", {"family", "alpha", "beta", "gamma", "extra"});
    const std::string name = detail::get_family(j, "transform");
    const auto fam = transform_family_from_string(name);
    if (!fam) throw ConfigError("transform.family: unknown family '" + name + "'");
    TransformSpec s = TransformSpec::make(*fam);
    s.alpha = detail::get_number(j, "alpha", "transform", 1.0);
    s.beta = detail::get_number(j, "beta", "transform", 0.0);
    s.gamma = detail::get_number(j, "gamma", "transform", 1.0);
    if (j.contains("extra")) {
        const Json& e = j.at("extra");
        detail::reject_unknown(e, "transform.extra", {"c", "degree", "shift"});
        s.smelu_c = detail::get_number(e, "c", "transform.extra", s.smelu_c);
        s.degree = detail::get_number(e, "degree", "transform.extra", s.degree);
        s.shift = detail::get_number(e, "shift", "transform.extra", s.shift);
    }
    s.validate();
    return s;
}

inline ScoreDomain domain_from_json(const Json& j) {
    detail::reject_unknown(j, "domain", {"min", "max", "points"});
    ScoreDomain d;
    d.s_min = detail::get_number(j, "min", "domain", d.s_min);
    d.s_max = detail::get_number(j, "max", "domain", d.s_max);
    if (j.contains("points")) d.grid_points = detail::get_count(j.at("points"), "domain.points");
    d.validate();
    return d;
}

inline ExperimentOptions experiment_from_json(const Json& j) {
    detail::reject_unknown(j, "experiment", {"learning_rate", "iterations", "low_repeat", "high_repeat",
                                             "alphas", "observed", "kappa", "delta"});
    ExperimentOptions o;
    if (j.contains("learning_rate")) o.learning_rate = detail::get_number(j, "learning_rate", "experiment", 0.0);
    if (j.contains("iterations")) o.iterations = detail::get_count(j.at("iterations"), "experiment.iterations");
    if (j.contains("low_repeat")) o.low_repeat = int(detail::get_count(j.at("low_repeat"), "experiment.low_repeat"));
    if (j.contains("high_repeat")) o.high_repeat = int(detail::get_count(j.at("high_repeat"), "experiment.high_repeat"));
    if (j.contains("alphas")) o.alphas = detail::get_numbers(j.at("alphas"), "experiment.alphas");
    if (j.contains("observed")) o.observed = detail::get_numbers(j.at("observed"), "experiment.observed");
    if (j.contains("kappa")) o.kappa = detail::get_number(j, "kappa", "experiment", 0.0);
    if (j.contains("delta")) o.delta = detail::get_number(j, "delta", "experiment", 0.0);
    return o;
}

inline ConfigDocument config_from_json(const Json& j) {
    detail::reject_unknown(j, "config", {"link", "transform", "domain", "experiment"});
    if (j.contains("link") && j.contains("transform")) {
        throw ConfigError("config: 'link' and 'transform' are mutually exclusive");
    }
    ConfigDocument doc;
    try {
        if (j.contains("link")) doc.link = link_from_json(j.at("link"));
        if (j.contains("transform")) doc.transform = transform_from_json(j.at("transform"));
        if (j.contains("domain")) doc.domain = domain_from_json(j.at("domain"));
    } catch (const InvalidSpec& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("experiment")) doc.experiment = experiment_from_json(j.at("experiment"));
    return doc;
}

inline ConfigDocument parse_config(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const LinkSpec& s) {
    Json j;
    j["family"] = std::string(to_string(s.family));
    j["alpha"] = s.alpha;
    j["beta"] = s.beta;
    Json extra = Json::object();
    if (s.family == LinkFamily::smelu_grad) extra["c"] = s.smelu_c;
    if (s.family == LinkFamily::huber_grad) extra["delta"] = s.huber_delta;
    if (s.family == LinkFamily::staircase) {
        extra["breakpoints"] = s.stairs.breakpoints;
        extra["levels"] = s.stairs.levels;
    }
    if (!extra.empty()) j["extra"] = extra;
    return j;
}

inline Json to_json(const TransformSpec& s) {
    Json j;
    j["family"] = std::string(to_string(s.family));
    j["alpha"] = s.alpha;
    j["beta"] = s.beta;
    j["gamma"] = s.gamma;
    Json extra = Json::object();
    if (s.family == TransformFamily::smelu) extra["c"] = s.smelu_c;
    if (s.family == TransformFamily::shifted_power) {
        extra["degree"] = s.degree;
        extra["shift"] = s.shift;
    }
    if (s.family == TransformFamily::f_abs_power) extra["degree"] = s.degree;
    if (!extra.empty()) j["extra"] = extra;
    return j;
}

inline Json to_json(const ScoreDomain& d) {
    return Json{{"min", d.s_min}, {"max", d.s_max}, {"points", d.grid_points}};
}

inline Json to_json(const ValidityReport& r) {
    Json j;
    j["verdict"] = std::string(to_string(r.verdict));
    j["method"] = std::string(to_string(r.method));
    j["margin"] = r.margin;
    Json w = Json::array();
    for (const auto& x : r.witnesses) w.push_back(Json{{"z", x.z}, {"value", x.value}});
    j["witnesses"] = w;
    return j;
}

inline Json to_json(const DesignChoice& c) {
    Json j;
    j["name"] = c.name;
    j["construction"] = c.construction;
    if (c.link) j["link"] = to_json(*c.link);
    if (c.transform) j["transform"] = to_json(*c.transform);
    if (!c.reason.empty()) j["reason"] = c.reason;
    j["negated_by_softmax"] = c.negated_by_softmax;
    return j;
}

inline Json to_json(const Recipe& r) {
    Json j;
    j["profile"] = std::string(to_string(r.profile));
    j["arity"] = std::string(to_string(r.arity));
    j["recommended"] = Json::array();
    for (const auto& c : r.recommended) j["recommended"].push_back(to_json(c));
    j["failing"] = Json::array();
    for (const auto& c : r.failing) j["failing"].push_back(to_json(c));
    return j;
}

}  // namespace selective
