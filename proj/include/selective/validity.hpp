#pragma once

// Grid-based certification and refutation of monotone links / convex
// matching losses on a compact score domain.
//
// Methods, from weakest to strongest:
//   theorem_monotone_q   q non-decreasing => convex (sufficient only)
//   corollary_pointwise  q' + (1/gamma)(1 - p) q^2 >= 0 (iff, scalar loss)
//   f_condition          the same condition written through f = e^Q
//   slope_scan           analytic h' >= 0; the ground-truth refutation

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "composite.hpp"
#include "core.hpp"
#include "link.hpp"

namespace selective {

enum class Verdict {
    certified_convex,
    certified_by_slope_scan,
    not_certified,  // a sufficient test did not apply; says nothing about validity
    invalid,
};

enum class CheckMethod {
    theorem_monotone_q,
    corollary_pointwise,
    f_condition,
    f_derivative_monotone,
    slope_scan,
};

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::certified_convex: return "certified_convex";
        case Verdict::certified_by_slope_scan: return "certified_by_slope_scan";
        case Verdict::not_certified: return "not_certified";
        case Verdict::invalid: return "invalid";
    }
    return "unknown";
}

inline std::string_view to_string(CheckMethod m) {
    switch (m) {
        case CheckMethod::theorem_monotone_q: return "theorem_monotone_q";
        case CheckMethod::corollary_pointwise: return "corollary_pointwise";
        case CheckMethod::f_condition: return "f_condition";
        case CheckMethod::f_derivative_monotone: return "f_derivative_monotone";
        case CheckMethod::slope_scan: return "slope_scan";
    }
    return "unknown";
}

struct Witness {
    double z = 0.0;
    double value = 0.0;
};

struct ValidityReport {
    Verdict verdict = Verdict::not_certified;
    CheckMethod method = CheckMethod::slope_scan;
    std::vector<Witness> witnesses;  // sorted by z
    double margin = 0.0;             // minimum slack of the tested condition

    bool certified() const {
        return verdict == Verdict::certified_convex || verdict == Verdict::certified_by_slope_scan;
    }
};

inline constexpr double kValidityTolerance = 1e-9;

namespace detail {

// Scans `value(z)` over the grid; points where value < -tol(z) become
// witnesses.
template <class ValueFn, class TolFn>
ValidityReport grid_scan(const ScoreDomain& domain, CheckMethod method, Verdict pass, Verdict fail,
                         ValueFn&& value, TolFn&& tol) {
    domain.validate();
    ValidityReport r;
    r.method = method;
    r.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < domain.grid_points; ++i) {
        const double z = domain.at(i);
        const double v = value(z);
        if (std::isnan(v)) {
            r.witnesses.push_back({z, v});
            continue;
        }
        r.margin = std::min(r.margin, v);
        if (v < -tol(z)) r.witnesses.push_back({z, v});
    }
    r.verdict = r.witnesses.empty() ? pass : fail;
    return r;
}

}  // namespace detail

// Theorem route: q non-decreasing across consecutive grid points.
inline ValidityReport check_monotone_q(const TransformSpec& spec, const ScoreDomain& domain) {
    spec.validate();
    domain.validate();
    ValidityReport r;
    r.method = CheckMethod::theorem_monotone_q;
    r.margin = std::numeric_limits<double>::infinity();
    double prev = transform_eval(spec, domain.at(0)).q;
    for (std::size_t i = 1; i < domain.grid_points; ++i) {
        const double z = domain.at(i);
        const double q = transform_eval(spec, z).q;
        const double diff = q - prev;
        r.margin = std::min(r.margin, diff);
        if (diff < -kValidityTolerance) r.witnesses.push_back({z, diff});
        prev = q;
    }
    r.verdict = r.witnesses.empty() ? Verdict::certified_convex : Verdict::not_certified;
    return r;
}

// Pointwise condition q'(z) + (1/gamma)(1 - p(z)) q(z)^2 >= 0.
inline ValidityReport check_pointwise_condition(const TransformSpec& spec, const ScoreDomain& domain) {
    spec.validate();
    auto lhs = [&](double z) {
        const CompositeEval e = transform_eval(spec, z);
        const double one_minus_p = detail::sigmoid(-e.Q / spec.gamma);
        return e.q_slope + one_minus_p * e.q * e.q / spec.gamma;
    };
    return detail::grid_scan(domain, CheckMethod::corollary_pointwise, Verdict::certified_convex,
                             Verdict::invalid, lhs, [](double) { return kValidityTolerance; });
}

// The same condition expressed through the score transform:
// f'' + [1/gamma - 1 - (1/gamma) f^{1/gamma} / (1 + f^{1/gamma})] f'^2 / f >= 0.
inline ValidityReport check_f_condition(const TransformSpec& spec, const ScoreDomain& domain) {
    spec.validate();
    const double g = spec.gamma;
    auto f_of = [&](double z) {
        const CompositeEval e = transform_eval(spec, z);
        return e;
    };
    auto expr = [&](double z) {
        const CompositeEval e = f_of(z);
        const double f = e.f;
        const double fp = e.q * f;
        const double fpp = (e.q_slope + e.q * e.q) * f;
        const double ratio = detail::sigmoid(e.Q / g);  // f^{1/g} / (1 + f^{1/g})
        const double bracket = 1.0 / g - 1.0 - ratio / g;
        double v = fpp + bracket * fp * (fp / f);
        if (!std::isfinite(v)) v = f * ((e.q_slope + e.q * e.q) + bracket * e.q * e.q);
        return v;
    };
    auto tol = [&](double z) { return kValidityTolerance * f_of(z).f; };
    return detail::grid_scan(domain, CheckMethod::f_condition, Verdict::certified_convex,
                             Verdict::invalid, expr, tol);
}

// Ground truth: the analytic link slope must be non-negative.
inline ValidityReport slope_scan(const LinkSpec& spec, const ScoreDomain& domain) {
    spec.validate();
    return detail::grid_scan(domain, CheckMethod::slope_scan, Verdict::certified_by_slope_scan,
                             Verdict::invalid, [&](double z) { return link_eval(spec, z).h_slope; },
                             [](double) { return kValidityTolerance; });
}

inline ValidityReport slope_scan(const TransformSpec& spec, const ScoreDomain& domain) {
    spec.validate();
    return detail::grid_scan(domain, CheckMethod::slope_scan, Verdict::certified_by_slope_scan,
                             Verdict::invalid, [&](double z) { return transform_eval(spec, z).h_slope; },
                             [](double) { return kValidityTolerance; });
}

// Necessary condition for gamma = 1: f'(z) = q(z) e^{Q(z)} is non-decreasing.
inline ValidityReport check_f_derivative_monotone(const TransformSpec& spec,
                                                  const ScoreDomain& domain) {
    spec.validate();
    domain.validate();
    ValidityReport r;
    r.method = CheckMethod::f_derivative_monotone;
    r.margin = std::numeric_limits<double>::infinity();
    auto fprime = [&](double z) {
        const CompositeEval e = transform_eval(spec, z);
        return e.q * e.f;
    };
    double prev = fprime(domain.at(0));
    for (std::size_t i = 1; i < domain.grid_points; ++i) {
        const double z = domain.at(i);
        const double cur = fprime(z);
        const double diff = cur - prev;
        const double scale = std::max({1.0, std::fabs(cur), std::fabs(prev)});
        r.margin = std::min(r.margin, diff / scale);
        if (diff < -kValidityTolerance * scale) r.witnesses.push_back({z, diff});
        prev = cur;
    }
    r.verdict = r.witnesses.empty() ? Verdict::certified_convex : Verdict::invalid;
    return r;
}

// Full validation: theorem route first, then the pointwise condition which
// both certifies and refutes.
inline ValidityReport validate_transform(const TransformSpec& spec, const ScoreDomain& domain) {
    ValidityReport mono = check_monotone_q(spec, domain);
    if (mono.certified()) return mono;
    return check_pointwise_condition(spec, domain);
}

inline ValidityReport validate_link(const LinkSpec& spec, const ScoreDomain& domain) {
    return slope_scan(spec, domain);
}

}  // namespace selective
