#pragma once

// Sensitivity-profile design table: which links / scalings give a desired
// region sensitivity, and which similar-looking choices fail.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "composite.hpp"
#include "link.hpp"

namespace selective {

enum class Profile { low_norm, high_norm, high_score, low_score };
enum class Arity { scalar, multiclass };

inline std::optional<Profile> profile_from_string(std::string_view s) {
    if (s == "low_norm") return Profile::low_norm;
    if (s == "high_norm") return Profile::high_norm;
    if (s == "high_score") return Profile::high_score;
    if (s == "low_score") return Profile::low_score;
    return std::nullopt;
}

inline std::optional<Arity> arity_from_string(std::string_view s) {
    if (s == "scalar") return Arity::scalar;
    if (s == "multiclass") return Arity::multiclass;
    return std::nullopt;
}

inline std::string_view to_string(Profile p) {
    switch (p) {
        case Profile::low_norm: return "low_norm";
        case Profile::high_norm: return "high_norm";
        case Profile::high_score: return "high_score";
        case Profile::low_score: return "low_score";
    }
    return "unknown";
}

inline std::string_view to_string(Arity a) { return a == Arity::scalar ? "scalar" : "multiclass"; }

// One design choice. Exactly one of link / transform is set for concrete
// choices; baselines without a spec (standard Softmax, square loss) leave
// both empty.
struct DesignChoice {
    std::string name;
    std::string construction;  // "link", "diagonal_link", "composite_softmax", "baseline"
    std::optional<LinkSpec> link;
    std::optional<TransformSpec> transform;
    std::string reason;               // empty for recommendations
    bool negated_by_softmax = false;  // p_k(z) offsets the scaling q(z)
};

struct Recipe {
    Profile profile;
    Arity arity;
    std::vector<DesignChoice> recommended;
    std::vector<DesignChoice> failing;
};

inline constexpr double kRecipeShift = 2.0;

namespace detail {

inline DesignChoice link_choice(std::string name, LinkSpec spec, bool diagonal = false) {
    return {std::move(name), diagonal ? "diagonal_link" : "link", spec, std::nullopt, {}, false};
}

inline DesignChoice softmax_choice(std::string name, TransformSpec spec) {
    return {std::move(name), "composite_softmax", std::nullopt, spec, {}, false};
}

inline DesignChoice baseline(std::string name, std::string reason) {
    return {std::move(name), "baseline", std::nullopt, std::nullopt, std::move(reason), false};
}

inline DesignChoice failing(DesignChoice c, std::string reason, bool negated) {
    c.reason = std::move(reason);
    c.negated_by_softmax = negated;
    return c;
}

inline std::vector<DesignChoice> standard_failures() {
    return {
        baseline("standard_softmax",
                 "shift invariant; separates the top score from the rest but not scores within a region"),
        baseline("square_loss", "uniform sensitivity over the whole score domain"),
    };
}

}  // namespace detail

inline Recipe recipe(Profile profile, Arity arity) {
    using LF = LinkFamily;
    using TF = TransformFamily;
    using namespace detail;
    const double b = kRecipeShift;
    Recipe r{profile, arity, {}, {}};

    if (arity == Arity::scalar) {
        switch (profile) {
            case Profile::low_norm:
                r.recommended = {
                    link_choice("sigmoid", LinkSpec::make(LF::sigmoid)),
                    link_choice("tanh", LinkSpec::make(LF::tanh)),
                    link_choice("smelu_grad", LinkSpec::make(LF::smelu_grad)),
                    link_choice("huber_grad", LinkSpec::make(LF::huber_grad)),
                    link_choice("sign", LinkSpec::make(LF::sign)),
                    link_choice("step", LinkSpec::make(LF::step)),
                };
                break;
            case Profile::high_norm:
                r.recommended = {link_choice("sinh", LinkSpec::make(LF::sinh))};
                break;
            case Profile::high_score:
                r.recommended = {
                    link_choice("exponential", LinkSpec::make(LF::exponential)),
                    link_choice("right_shifted_sigmoid", LinkSpec::make(LF::sigmoid, 1.0, b)),
                    link_choice("left_shifted_sinh", LinkSpec::make(LF::sinh, 1.0, -b)),
                };
                break;
            case Profile::low_score:
                r.recommended = {
                    link_choice("anti_exponential", LinkSpec::make(LF::anti_exponential)),
                    link_choice("left_shifted_sigmoid", LinkSpec::make(LF::sigmoid, 1.0, -b)),
                    link_choice("right_shifted_sinh", LinkSpec::make(LF::sinh, 1.0, b)),
                };
                break;
        }
        return r;
    }

    r.failing = standard_failures();
    switch (profile) {
        case Profile::low_norm:
            r.recommended = {link_choice("diagonal_sigmoid", LinkSpec::make(LF::sigmoid), true)};
            r.failing.push_back(failing(softmax_choice("composite_softmax", TransformSpec::make(TF::sigmoid_scaling)),
                                        "p_k(z) pushes sensitivity towards other regions", true));
            r.failing.push_back(failing(softmax_choice("composite_softmax_tanh", TransformSpec::make(TF::tanh_scaling)),
                                        "p_k(z) pushes sensitivity towards other regions", true));
            break;
        case Profile::high_norm:
            r.recommended = {softmax_choice("composite_sinh", TransformSpec::make(TF::sinh))};
            r.failing.push_back(failing(link_choice("diagonal_sinh", LinkSpec::make(LF::sinh), true),
                                        "decomposed loss is not constellation shift invariant", false));
            break;
        case Profile::high_score:
            r.recommended = {
                softmax_choice("composite_exponential", TransformSpec::make(TF::exponential)),
                softmax_choice("composite_right_shifted_sigmoid", TransformSpec::make(TF::sigmoid_scaling, 1.0, b)),
                softmax_choice("composite_left_shifted_sinh", TransformSpec::make(TF::sinh, 1.0, -b)),
            };
            r.failing.push_back(failing(link_choice("diagonal_exponential", LinkSpec::make(LF::exponential), true),
                                        "decomposed loss is not constellation shift invariant", false));
            r.failing.push_back(failing(softmax_choice("composite_right_shifted_tanh", TransformSpec::make(TF::tanh_scaling, 1.0, b)),
                                        "p_k(z) negates the shifted tanh scaling", true));
            break;
        case Profile::low_score:
            r.recommended = {
                softmax_choice("composite_anti_exponential", TransformSpec::make(TF::anti_exponential)),
                softmax_choice("composite_right_shifted_sinh", TransformSpec::make(TF::sinh, 1.0, b)),
            };
            r.failing.push_back(failing(link_choice("diagonal_anti_exponential", LinkSpec::make(LF::anti_exponential), true),
                                        "decomposed loss is not constellation shift invariant", false));
            r.failing.push_back(failing(softmax_choice("composite_left_shifted_sigmoid", TransformSpec::make(TF::sigmoid_scaling, 1.0, -b)),
                                        "p_k(z) negates the shifted sigmoid scaling", true));
            r.failing.push_back(failing(softmax_choice("composite_left_shifted_tanh", TransformSpec::make(TF::tanh_scaling, 1.0, -b)),
                                        "p_k(z) negates the shifted tanh scaling", true));
            break;
    }
    return r;
}

}  // namespace selective
