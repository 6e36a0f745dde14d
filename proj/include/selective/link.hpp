#pragma once

// Catalog of scalar link functions h(z), their primitives H(z) and slopes
// h'(z). Every family is evaluated on the shifted/scaled variable
// x = alpha * (z - beta); primitives carry the 1/alpha factor so that
// dH/dz = h exactly.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace selective {

enum class LinkFamily {
    sigmoid,
    identity,
    exponential,
    anti_exponential,
    sinh,
    tanh,
    step,
    sign,
    smelu_grad,
    huber_grad,
    staircase,
};

inline constexpr std::array<LinkFamily, 11> kAllLinkFamilies = {
    LinkFamily::sigmoid,     LinkFamily::identity,   LinkFamily::exponential,
    LinkFamily::anti_exponential, LinkFamily::sinh,  LinkFamily::tanh,
    LinkFamily::step,        LinkFamily::sign,       LinkFamily::smelu_grad,
    LinkFamily::huber_grad,  LinkFamily::staircase,
};

inline std::string_view to_string(LinkFamily f) {
    switch (f) {
        case LinkFamily::sigmoid: return "sigmoid";
        case LinkFamily::identity: return "identity";
        case LinkFamily::exponential: return "exponential";
        case LinkFamily::anti_exponential: return "anti_exponential";
        case LinkFamily::sinh: return "sinh";
        case LinkFamily::tanh: return "tanh";
        case LinkFamily::step: return "step";
        case LinkFamily::sign: return "sign";
        case LinkFamily::smelu_grad: return "smelu_grad";
        case LinkFamily::huber_grad: return "huber_grad";
        case LinkFamily::staircase: return "staircase";
    }
    return "unknown";
}

inline std::optional<LinkFamily> link_family_from_string(std::string_view name) {
    for (LinkFamily f : kAllLinkFamilies) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

// Staircase link: levels[0] below breakpoints[0], levels[i] on
// [breakpoints[i-1], breakpoints[i]), levels.back() above the last one.
// Breakpoints live in x-space like every other family.
struct Staircase {
    std::vector<double> breakpoints;
    std::vector<double> levels;
};

struct LinkSpec {
    LinkFamily family = LinkFamily::sigmoid;
    double alpha = 1.0;
    double beta = 0.0;
    double smelu_c = 1.0;      // SmeLU half-width
    double huber_delta = 1.0;  // Huber threshold
    Staircase stairs;

    double x_of(double z) const { return alpha * (z - beta); }

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw InvalidSpec("link: alpha must be a positive finite number");
        }
        if (!std::isfinite(beta)) throw InvalidSpec("link: beta must be finite");
        if (family == LinkFamily::smelu_grad && !(smelu_c > 0.0)) {
            throw InvalidSpec("link: smelu_grad requires c > 0");
        }
        if (family == LinkFamily::huber_grad && !(huber_delta > 0.0)) {
            throw InvalidSpec("link: huber_grad requires delta > 0");
        }
        if (family == LinkFamily::staircase) {
            const auto& b = stairs.breakpoints;
            const auto& l = stairs.levels;
            if (b.empty()) throw InvalidSpec("link: staircase needs at least one breakpoint");
            if (l.size() != b.size() + 1) {
                throw InvalidSpec("link: staircase needs exactly one more level than breakpoints");
            }
            for (std::size_t i = 1; i < b.size(); ++i) {
                if (!(b[i] > b[i - 1])) {
                    throw InvalidSpec("link: staircase breakpoints must be strictly increasing");
                }
            }
            for (std::size_t i = 1; i < l.size(); ++i) {
                if (l[i] < l[i - 1]) {
                    throw InvalidSpec("link: staircase levels must be non-decreasing");
                }
            }
        }
    }

    static LinkSpec make(LinkFamily f, double alpha = 1.0, double beta = 0.0) {
        LinkSpec s;
        s.family = f;
        s.alpha = alpha;
        s.beta = beta;
        if (f == LinkFamily::staircase) {
            s.stairs = {{-1.0, 1.0}, {0.0, 0.5, 1.0}};
        }
        s.validate();
        return s;
    }

    static LinkSpec smelu(double c, double alpha = 1.0, double beta = 0.0) {
        LinkSpec s = make(LinkFamily::smelu_grad, alpha, beta);
        s.smelu_c = c;
        s.validate();
        return s;
    }

    static LinkSpec huber(double delta, double alpha = 1.0, double beta = 0.0) {
        LinkSpec s = make(LinkFamily::huber_grad, alpha, beta);
        s.huber_delta = delta;
        s.validate();
        return s;
    }

    static LinkSpec staircase(Staircase st, double alpha = 1.0, double beta = 0.0) {
        LinkSpec s;
        s.family = LinkFamily::staircase;
        s.alpha = alpha;
        s.beta = beta;
        s.stairs = std::move(st);
        s.validate();
        return s;
    }
};

struct LinkValue {
    double h = 0.0;
    double H = 0.0;
    double h_slope = 0.0;
    bool saturated = false;  // an exponent hit the clamp
};

// True for families whose h is strictly increasing on all of R.
inline bool strictly_increasing(const LinkSpec& spec) {
    switch (spec.family) {
        case LinkFamily::sigmoid:
        case LinkFamily::identity:
        case LinkFamily::exponential:
        case LinkFamily::anti_exponential:
        case LinkFamily::sinh:
        case LinkFamily::tanh:
            return true;
        default:
            return false;
    }
}

// Locations (in z) where h or h' is discontinuous.
inline std::vector<double> link_breakpoints(const LinkSpec& spec) {
    auto to_z = [&](double x) { return spec.beta + x / spec.alpha; };
    switch (spec.family) {
        case LinkFamily::step:
        case LinkFamily::sign:
            return {spec.beta};
        case LinkFamily::smelu_grad:
            return {to_z(-spec.smelu_c), to_z(spec.smelu_c)};
        case LinkFamily::huber_grad:
            return {to_z(-spec.huber_delta), to_z(spec.huber_delta)};
        case LinkFamily::staircase: {
            std::vector<double> out;
            for (double b : spec.stairs.breakpoints) out.push_back(to_z(b));
            return out;
        }
        default:
            return {};
    }
}

namespace detail {

// h and its x-space antiderivative for the staircase; the primitive is
// anchored at the first breakpoint and accumulated left to right.
inline std::pair<double, double> staircase_eval(const Staircase& st, double x) {
    const auto& b = st.breakpoints;
    const auto& l = st.levels;
    if (x < b.front()) {
        return {l.front(), l.front() * (x - b.front())};
    }
    double area = 0.0;
    std::size_t i = 0;
    for (; i + 1 < b.size() && x >= b[i + 1]; ++i) {
        area += l[i + 1] * (b[i + 1] - b[i]);
    }
    return {l[i + 1], area + l[i + 1] * (x - b[i])};
}

}  // namespace detail

// Evaluates h(z), H(z) and h'(z). At piecewise boundaries h and h' take
// their right-limit values.
inline LinkValue link_eval(const LinkSpec& spec, double z) {
    detail::require_finite(z, "link_eval: z");
    const double a = spec.alpha;
    const double x = spec.x_of(z);
    LinkValue v;
    switch (spec.family) {
        case LinkFamily::sigmoid: {
            v.h = detail::sigmoid(x);
            v.H = detail::softplus(x) / a;
            v.h_slope = a * detail::sigmoid(x) * detail::sigmoid(-x);
            break;
        }
        case LinkFamily::identity: {
            v.h = x;
            v.H = 0.5 * x * x / a;
            v.h_slope = a;
            break;
        }
        case LinkFamily::exponential: {
            const double e = detail::safe_exp(x, &v.saturated);
            v.h = e;
            v.H = e / a;
            v.h_slope = a * e;
            break;
        }
        case LinkFamily::anti_exponential: {
            const double e = detail::safe_exp(-x, &v.saturated);
            v.h = -e;
            v.H = e / a;
            v.h_slope = a * e;
            break;
        }
        case LinkFamily::sinh: {
            const double xc = detail::clamp_exp_arg(x, &v.saturated);
            v.h = std::sinh(xc);
            v.H = std::cosh(xc) / a;
            v.h_slope = a * std::cosh(xc);
            break;
        }
        case LinkFamily::tanh: {
            const double xc = detail::clamp_exp_arg(x, &v.saturated);
            const double c = std::cosh(xc);
            v.h = std::tanh(x);
            v.H = detail::log_cosh(x) / a;
            v.h_slope = a / (c * c);
            break;
        }
        case LinkFamily::step: {
            v.h = x >= 0.0 ? 1.0 : 0.0;
            v.H = std::max(x, 0.0) / a;
            v.h_slope = 0.0;
            break;
        }
        case LinkFamily::sign: {
            v.h = detail::sign_right(x);
            v.H = std::fabs(x) / a;
            v.h_slope = 0.0;
            break;
        }
        case LinkFamily::smelu_grad: {
            const double c = spec.smelu_c;
            if (x < -c) {
                v.h = 0.0;
                v.H = 0.0;
                v.h_slope = 0.0;
            } else if (x < c) {
                v.h = (x + c) / (2.0 * c);
                v.H = (x + c) * (x + c) / (4.0 * c) / a;
                v.h_slope = a / (2.0 * c);
            } else {
                v.h = 1.0;
                v.H = x / a;
                v.h_slope = 0.0;
            }
            break;
        }
        case LinkFamily::huber_grad: {
            const double d = spec.huber_delta;
            if (x < -d) {
                v.h = -1.0;
                v.H = (-x - 0.5 * d) / a;
                v.h_slope = 0.0;
            } else if (x < d) {
                v.h = x / d;
                v.H = 0.5 * x * x / d / a;
                v.h_slope = a / d;
            } else {
                v.h = 1.0;
                v.H = (x - 0.5 * d) / a;
                v.h_slope = 0.0;
            }
            break;
        }
        case LinkFamily::staircase: {
            auto [h, prim] = detail::staircase_eval(spec.stairs, x);
            v.h = h;
            v.H = prim / a;
            v.h_slope = 0.0;
            break;
        }
    }
    return v;
}

inline double link_h(const LinkSpec& spec, double z) { return link_eval(spec, z).h; }

// Inverts h on the domain by bracketed bisection.
inline double link_inverse(const LinkSpec& spec, double y, const ScoreDomain& domain) {
    detail::require_finite(y, "link_inverse: y");
    const double lo = domain.s_min;
    const double hi = domain.s_max;
    const double h_lo = link_h(spec, lo);
    const double h_hi = link_h(spec, hi);
    if (y < h_lo || y > h_hi) {
        throw OutOfRange("link_inverse: value " + std::to_string(y) +
                         " lies outside the link image [" + std::to_string(h_lo) + ", " +
                         std::to_string(h_hi) + "] on the domain");
    }

    // Smallest z with h(z) >= y and largest z with h(z) <= y.
    auto lower_edge = [&] {
        double a = lo, b = hi;
        if (h_lo >= y) return lo;
        for (int it = 0; it < kMaxBisections; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            if (link_h(spec, m) >= y) b = m; else a = m;
        }
        return b;
    };
    auto upper_edge = [&] {
        double a = lo, b = hi;
        if (h_hi <= y) return hi;
        for (int it = 0; it < kMaxBisections; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            if (link_h(spec, m) <= y) a = m; else b = m;
        }
        return a;
    };

    const double z_lo = lower_edge();
    const double z_hi = upper_edge();
    const double flat_tol = 1e-9 * std::max(1.0, domain.width());
    if (z_hi - z_lo > flat_tol) {
        throw NonInjectiveLink("link_inverse: link is flat over [" + std::to_string(z_lo) + ", " +
                               std::to_string(z_hi) + "] at value " + std::to_string(y));
    }
    const double z = 0.5 * (z_lo + z_hi);
    const double resid = std::fabs(link_h(spec, z) - y);
    if (resid > 1e-9 * std::max(1.0, std::fabs(y))) {
        // Jump discontinuity: the value is skipped by the link.
        throw OutOfRange("link_inverse: value " + std::to_string(y) +
                         " falls inside a jump of the link at z=" + std::to_string(z));
    }
    return z;
}

}  // namespace selective
