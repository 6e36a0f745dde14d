#pragma once

// Log-score-transforms Q(z), scaling functions q(z) = Q'(z), score
// transforms f(z) = e^{Q(z)} and the gamma-regularized composite Sigmoid
//
//   p(z) = sigma(Q(z) / gamma),  H(z) = gamma * softplus(Q(z) / gamma),
//   h(z) = q(z) p(z),            h'(z) = p {q' + (1/gamma)(1 - p) q^2}.
//
// Family names describe the shape of q. With x = alpha (z - beta) every
// family is q(z) = alpha * shape(x) and Q(z) = Shape(x), so Q' = q.
//
// Besides the designable catalog the enum carries six score transforms
// that are known to produce decreasing links; they exist so the validity
// checks can refute them.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace selective {

enum class TransformFamily {
    linear,
    convex_quadratic,
    exponential,
    anti_exponential,
    sinh,
    cosh,
    sigmoid_scaling,
    tanh_scaling,
    relu,
    smelu,
    shifted_power,
    // score transforms f(z) that cannot yield a monotone link
    f_abs_power,    // f = |x|^d
    f_exp_sigmoid,  // f = e^{sigma(x)}, q is the logistic density
    f_exp_tanh,     // f = e^{tanh(x)}
    f_softplus,     // f = log(1 + e^x)
    f_sigmoid,      // f = sigma(x)
    f_sinh_abs,     // f = sinh(|x|)
};

inline constexpr std::array<TransformFamily, 11> kDesignTransformFamilies = {
    TransformFamily::linear,          TransformFamily::convex_quadratic,
    TransformFamily::exponential,     TransformFamily::anti_exponential,
    TransformFamily::sinh,            TransformFamily::cosh,
    TransformFamily::sigmoid_scaling, TransformFamily::tanh_scaling,
    TransformFamily::relu,            TransformFamily::smelu,
    TransformFamily::shifted_power,
};

inline constexpr std::array<TransformFamily, 6> kInvalidScoreTransforms = {
    TransformFamily::f_abs_power, TransformFamily::f_exp_sigmoid, TransformFamily::f_exp_tanh,
    TransformFamily::f_softplus,  TransformFamily::f_sigmoid,     TransformFamily::f_sinh_abs,
};

inline std::string_view to_string(TransformFamily f) {
    switch (f) {
        case TransformFamily::linear: return "linear";
        case TransformFamily::convex_quadratic: return "convex_quadratic";
        case TransformFamily::exponential: return "exponential";
        case TransformFamily::anti_exponential: return "anti_exponential";
        case TransformFamily::sinh: return "sinh";
        case TransformFamily::cosh: return "cosh";
        case TransformFamily::sigmoid_scaling: return "sigmoid_scaling";
        case TransformFamily::tanh_scaling: return "tanh_scaling";
        case TransformFamily::relu: return "relu";
        case TransformFamily::smelu: return "smelu";
        case TransformFamily::shifted_power: return "shifted_power";
        case TransformFamily::f_abs_power: return "f_abs_power";
        case TransformFamily::f_exp_sigmoid: return "f_exp_sigmoid";
        case TransformFamily::f_exp_tanh: return "f_exp_tanh";
        case TransformFamily::f_softplus: return "f_softplus";
        case TransformFamily::f_sigmoid: return "f_sigmoid";
        case TransformFamily::f_sinh_abs: return "f_sinh_abs";
    }
    return "unknown";
}

inline std::optional<TransformFamily> transform_family_from_string(std::string_view name) {
    for (TransformFamily f : kDesignTransformFamilies) {
        if (to_string(f) == name) return f;
    }
    for (TransformFamily f : kInvalidScoreTransforms) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

struct TransformSpec {
    TransformFamily family = TransformFamily::linear;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    double smelu_c = 1.0;  // smelu half-width
    double degree = 1.0;   // shifted_power d >= 1; f_abs_power exponent d > 0
    double shift = 0.0;    // shifted_power vertical shift c_s

    double x_of(double z) const { return alpha * (z - beta); }

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw InvalidSpec("transform: alpha must be a positive finite number");
        }
        if (!std::isfinite(beta)) throw InvalidSpec("transform: beta must be finite");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw InvalidSpec("transform: gamma must be a positive finite number");
        }
        if (family == TransformFamily::smelu && !(smelu_c > 0.0)) {
            throw InvalidSpec("transform: smelu requires c > 0");
        }
        if (family == TransformFamily::shifted_power) {
            if (!(degree >= 1.0)) throw InvalidSpec("transform: shifted_power requires degree >= 1");
            if (!std::isfinite(shift)) throw InvalidSpec("transform: shifted_power shift must be finite");
        }
        if (family == TransformFamily::f_abs_power && !(degree > 0.0)) {
            throw InvalidSpec("transform: f_abs_power requires degree > 0");
        }
    }

    static TransformSpec make(TransformFamily f, double alpha = 1.0, double beta = 0.0,
                              double gamma = 1.0) {
        TransformSpec s;
        s.family = f;
        s.alpha = alpha;
        s.beta = beta;
        s.gamma = gamma;
        if (f == TransformFamily::shifted_power) {
            s.degree = 2.0;
            s.shift = 2.0;
        }
        if (f == TransformFamily::f_abs_power) s.degree = 0.5;
        s.validate();
        return s;
    }

    static TransformSpec shifted_power(double degree, double shift, double alpha = 1.0,
                                       double beta = 0.0, double gamma = 1.0) {
        TransformSpec s = make(TransformFamily::shifted_power, alpha, beta, gamma);
        s.degree = degree;
        s.shift = shift;
        s.validate();
        return s;
    }

    static TransformSpec smelu(double c, double alpha = 1.0, double beta = 0.0, double gamma = 1.0) {
        TransformSpec s = make(TransformFamily::smelu, alpha, beta, gamma);
        s.smelu_c = c;
        s.validate();
        return s;
    }
};

inline bool is_designable(TransformFamily f) {
    for (TransformFamily d : kDesignTransformFamilies) {
        if (d == f) return true;
    }
    return false;
}

// Sufficient lower bound on the shifted_power vertical shift for a convex
// loss; returns a message when the spec falls below it.
inline std::optional<std::string> shifted_power_warning(const TransformSpec& spec) {
    if (spec.family != TransformFamily::shifted_power) return std::nullopt;
    const double g = spec.gamma;
    const double d = spec.degree;
    const double bound = std::max(std::sqrt(2.0 * g * d), g * d - 0.5);
    if (spec.shift < bound) {
        return "shifted_power: shift " + std::to_string(spec.shift) +
               " is below the sufficient convexity bound " + std::to_string(bound) +
               "; run validate before use";
    }
    return std::nullopt;
}

// Breakpoints (in z) where q or q' is discontinuous or singular.
inline std::vector<double> transform_breakpoints(const TransformSpec& spec) {
    auto to_z = [&](double x) { return spec.beta + x / spec.alpha; };
    switch (spec.family) {
        case TransformFamily::relu:
        case TransformFamily::f_abs_power:
        case TransformFamily::f_sinh_abs:
            return {spec.beta};
        case TransformFamily::smelu:
            return {to_z(-spec.smelu_c), to_z(spec.smelu_c)};
        case TransformFamily::shifted_power:
            if (spec.degree < 2.0) return {spec.beta};
            return {};
        default:
            return {};
    }
}

struct CompositeEval {
    double q = 0.0;
    double q_slope = 0.0;  // q'(z)
    double Q = 0.0;
    double f = 0.0;
    double p = 0.0;
    double H = 0.0;
    double h = 0.0;
    double h_slope = 0.0;
    bool saturated = false;
};

namespace detail {

struct ShapeValue {
    double S = 0.0;        // Q as a function of x
    double s = 0.0;        // dS/dx
    double s_slope = 0.0;  // d^2S/dx^2
};

// Keeps singular families away from x = 0 while preserving the
// right-continuous sign convention.
inline double away_from_zero(double x) {
    constexpr double kFloor = 1e-12;
    if (std::fabs(x) < kFloor) return x < 0.0 ? -kFloor : kFloor;
    return x;
}

inline ShapeValue transform_shape(const TransformSpec& spec, double x, bool* saturated) {
    ShapeValue v;
    switch (spec.family) {
        case TransformFamily::linear:
            v = {x, 1.0, 0.0};
            break;
        case TransformFamily::convex_quadratic:
            v = {0.5 * x * x, x, 1.0};
            break;
        case TransformFamily::exponential: {
            // Double-exponential composite; usable for x in about [-5, 5].
            const double e = safe_exp(x, saturated);
            v = {e, e, e};
            break;
        }
        case TransformFamily::anti_exponential: {
            const double e = safe_exp(-x, saturated);
            v = {e, -e, e};
            break;
        }
        case TransformFamily::sinh: {
            const double xc = clamp_exp_arg(x, saturated);
            v = {std::cosh(xc), std::sinh(xc), std::cosh(xc)};
            break;
        }
        case TransformFamily::cosh: {
            const double xc = clamp_exp_arg(x, saturated);
            v = {std::sinh(xc), std::cosh(xc), std::sinh(xc)};
            break;
        }
        case TransformFamily::sigmoid_scaling:
            v = {softplus(x), sigmoid(x), sigmoid(x) * sigmoid(-x)};
            break;
        case TransformFamily::tanh_scaling: {
            const double c = std::cosh(clamp_exp_arg(x, saturated));
            v = {log_cosh(x), std::tanh(x), 1.0 / (c * c)};
            break;
        }
        case TransformFamily::relu:
            v = {std::max(x, 0.0), x >= 0.0 ? 1.0 : 0.0, 0.0};
            break;
        case TransformFamily::smelu: {
            const double c = spec.smelu_c;
            if (x < -c) {
                v = {0.0, 0.0, 0.0};
            } else if (x < c) {
                v = {(x + c) * (x + c) / (4.0 * c), (x + c) / (2.0 * c), 1.0 / (2.0 * c)};
            } else {
                v = {x, 1.0, 0.0};
            }
            break;
        }
        case TransformFamily::shifted_power: {
            const double d = spec.degree;
            const double ax = std::fabs(x);
            const double sg = sign_right(x);
            const double slope = (d == 1.0) ? sg : d * sg * std::pow(ax, d - 1.0);
            v = {sg * std::pow(ax, d + 1.0) / (d + 1.0) + spec.shift * x, std::pow(ax, d) + spec.shift,
                 slope};
            break;
        }
        case TransformFamily::f_abs_power: {
            const double d = spec.degree;
            const double xs = away_from_zero(x);
            v = {d * std::log(std::fabs(xs)), d / xs, -d / (xs * xs)};
            break;
        }
        case TransformFamily::f_exp_sigmoid: {
            const double sp = sigmoid(x);
            const double sn = sigmoid(-x);
            v = {sp, sp * sn, sp * sn * (sn - sp)};
            break;
        }
        case TransformFamily::f_exp_tanh: {
            const double c = std::cosh(clamp_exp_arg(x, saturated));
            const double t = std::tanh(x);
            v = {t, 1.0 / (c * c), -2.0 * t / (c * c)};
            break;
        }
        case TransformFamily::f_softplus: {
            const double xc = clamp_exp_arg(x, saturated);
            const double sp = softplus(xc);
            const double sg = sigmoid(xc);
            const double sgn = sigmoid(-xc);
            v = {std::log(sp), sg / sp, (sg * sgn * sp - sg * sg) / (sp * sp)};
            break;
        }
        case TransformFamily::f_sigmoid: {
            const double sp = sigmoid(x);
            const double sn = sigmoid(-x);
            v = {-softplus(-x), sn, -sp * sn};
            break;
        }
        case TransformFamily::f_sinh_abs: {
            const double xs = away_from_zero(x);
            const double u = std::min(std::fabs(xs), kExpClamp);
            // log sinh(u) = u + log1p(-e^{-2u}) - log 2
            const double log_sinh = u + std::log1p(-std::exp(-2.0 * u)) - std::log(2.0);
            const double sh = std::sinh(u);
            v = {log_sinh, sign_right(xs) / std::tanh(u), -1.0 / (sh * sh)};
            break;
        }
    }
    return v;
}

}  // namespace detail

inline CompositeEval transform_eval(const TransformSpec& spec, double z) {
    detail::require_finite(z, "transform_eval: z");
    const double a = spec.alpha;
    const double g = spec.gamma;
    CompositeEval out;
    const auto shape = detail::transform_shape(spec, spec.x_of(z), &out.saturated);
    out.Q = shape.S;
    out.q = a * shape.s;
    out.q_slope = a * a * shape.s_slope;
    out.f = detail::safe_exp(out.Q, &out.saturated);
    const double t = out.Q / g;
    out.p = detail::sigmoid(t);
    const double one_minus_p = detail::sigmoid(-t);
    out.H = g * detail::softplus(t);
    out.h = out.q * out.p;
    out.h_slope = out.p * (out.q_slope + one_minus_p * out.q * out.q / g);
    return out;
}

// Amplified scalar matching loss H(s_hat) - H(s) - (s_hat - s) q(s) p(s).
inline double amplified_loss(const TransformSpec& spec, double s_hat, double s) {
    detail::require_finite(s_hat, "amplified_loss: s_hat");
    detail::require_finite(s, "amplified_loss: s");
    const CompositeEval es = transform_eval(spec, s);
    const CompositeEval eh = transform_eval(spec, s_hat);
    return eh.H - es.H - (s_hat - s) * es.h;
}

// q(s_hat) p(s_hat) - q(s) p(s).
inline double amplified_grad(const TransformSpec& spec, double s_hat, double s) {
    return transform_eval(spec, s_hat).h - transform_eval(spec, s).h;
}

struct CompositeCe {
    double loss = 0.0;
    double grad = 0.0;
};

// Cross entropy with the composite Sigmoid probability:
// gamma softplus(Q(s_hat)/gamma) - p(s) Q(s_hat). The caller is
// responsible for p being injective on its domain.
inline CompositeCe ce_loss_composite(const TransformSpec& spec, double s_hat, double s) {
    detail::require_finite(s_hat, "ce_loss_composite: s_hat");
    detail::require_finite(s, "ce_loss_composite: s");
    const CompositeEval es = transform_eval(spec, s);
    const CompositeEval eh = transform_eval(spec, s_hat);
    CompositeCe r;
    r.loss = eh.H - es.p * eh.Q;
    r.grad = eh.q * (eh.p - es.p);
    return r;
}

}  // namespace selective
