#pragma once

// Scalar matching losses (Bregman divergences of a link primitive), the
// sigmoid cross-entropy comparator, proper predictions, and the
// bias-underspecification sensitivity measures BUST / BLUST.

#include <cmath>
#include <utility>
#include <vector>

#include "core.hpp"
#include "link.hpp"

namespace selective {

struct LossValue {
    double value = 0.0;
    bool saturated = false;
};

// H(s_hat) - H(s) - (s_hat - s) h(s). Smooth exponential-type families use
// algebraically equal expm1/log1p forms that avoid cancellation when
// s_hat is close to s.
inline LossValue matching_loss_eval(const LinkSpec& link, double s_hat, double s) {
    detail::require_finite(s_hat, "matching_loss: s_hat");
    detail::require_finite(s, "matching_loss: s");
    const double a = link.alpha;
    const double x = link.x_of(s);
    const double xh = link.x_of(s_hat);
    const double d = xh - x;
    LossValue out;
    switch (link.family) {
        case LinkFamily::identity:
            out.value = 0.5 * d * d / a;
            return out;
        case LinkFamily::sigmoid: {
            // softplus(xh) - softplus(x) = log1p(sigma(x) * expm1(d))
            const double p = detail::sigmoid(x);
            double diff;
            if (std::fabs(d) <= 1.0) {
                diff = std::log1p(p * std::expm1(d));
            } else {
                diff = detail::softplus(xh) - detail::softplus(x);
            }
            out.value = (diff - d * p) / a;
            return out;
        }
        case LinkFamily::tanh: {
            if (std::fabs(d) > 1.0) break;
            // log cosh(x + d) - log cosh(x) = log1p(2 sinh^2(d/2) + tanh(x) sinh(d))
            const double t = std::tanh(x);
            const double sh = std::sinh(0.5 * d);
            out.value = (std::log1p(2.0 * sh * sh + t * std::sinh(d)) - d * t) / a;
            return out;
        }
        case LinkFamily::exponential: {
            const double e = detail::safe_exp(x, &out.saturated);
            const double dc = detail::clamp_exp_arg(xh, &out.saturated) - detail::clamp_exp_arg(x);
            out.value = e * (std::expm1(dc) - d) / a;
            return out;
        }
        case LinkFamily::anti_exponential: {
            const double e = detail::safe_exp(-x, &out.saturated);
            const double dc = detail::clamp_exp_arg(-xh, &out.saturated) - detail::clamp_exp_arg(-x);
            out.value = e * (std::expm1(dc) + d) / a;
            return out;
        }
        default:
            break;
    }
    const LinkValue vs = link_eval(link, s);
    const LinkValue vh = link_eval(link, s_hat);
    out.saturated = vs.saturated || vh.saturated;
    out.value = vh.H - vs.H - (s_hat - s) * vs.h;
    return out;
}

inline double matching_loss(const LinkSpec& link, double s_hat, double s) {
    return matching_loss_eval(link, s_hat, s).value;
}

// h(s_hat) - h(s).
inline double matching_grad(const LinkSpec& link, double s_hat, double s) {
    return link_h(link, s_hat) - link_h(link, s);
}

struct LossAndGrad {
    double loss = 0.0;
    double grad = 0.0;
};

// Cross entropy between p(s) and p(s_hat), p = sigma(alpha (z - beta)),
// normalized by 1/alpha.
inline LossAndGrad ce_loss_sigmoid(double alpha, double beta, double s_hat, double s) {
    if (!(alpha > 0.0)) throw InvalidSpec("ce_loss_sigmoid: alpha must be positive");
    detail::require_finite(s_hat, "ce_loss_sigmoid: s_hat");
    detail::require_finite(s, "ce_loss_sigmoid: s");
    const double xh = alpha * (s_hat - beta);
    const double ps = detail::sigmoid(alpha * (s - beta));
    LossAndGrad r;
    r.loss = (detail::softplus(xh) - ps * xh) / alpha;
    r.grad = detail::sigmoid(xh) - ps;
    return r;
}

// Observed scores with positive weights; normalized on use.
struct WeightedScores {
    std::vector<std::pair<double, double>> entries;  // (score, weight)

    void validate() const {
        if (entries.empty()) throw InvalidSpec("weighted scores: empty population");
        double total = 0.0;
        for (auto [s, w] : entries) {
            detail::require_finite(s, "weighted scores: score");
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw InvalidSpec("weighted scores: weights must be positive");
            }
            total += w;
        }
        if (!(total > 0.0)) throw InvalidSpec("weighted scores: total weight must be positive");
    }

    double total_weight() const {
        double t = 0.0;
        for (auto [s, w] : entries) t += w;
        return t;
    }

    double mean() const {
        double m = 0.0;
        for (auto [s, w] : entries) m += w * s;
        return m / total_weight();
    }

    double min_score() const {
        double m = entries.front().first;
        for (auto [s, w] : entries) m = std::min(m, s);
        return m;
    }

    double max_score() const {
        double m = entries.front().first;
        for (auto [s, w] : entries) m = std::max(m, s);
        return m;
    }
};

// h^{-1}(E_P h(S)): the minimizer of the expected matching loss.
inline double proper_prediction(const LinkSpec& link, const WeightedScores& obs,
                                const ScoreDomain& domain) {
    obs.validate();
    double acc = 0.0;
    for (auto [s, w] : obs.entries) acc += w * link_h(link, s);
    const double mean_link = acc / obs.total_weight();
    return link_inverse(link, mean_link, domain);
}

// Expected matching loss of a single prediction under the population.
inline double expected_loss(const LinkSpec& link, const WeightedScores& obs, double s_hat) {
    double acc = 0.0;
    for (auto [s, w] : obs.entries) acc += w * matching_loss(link, s_hat, s);
    return acc / obs.total_weight();
}

// Setup for the bias-underspecification sensitivity: observed scores are
// uniform on the domain except for a width-tau interval centered at w_u
// that is offset by d.
struct BustConfig {
    ScoreDomain domain;
    double w_u = 0.0;
    double d = 0.0;
    double tau = 1e-3;

    void validate() const {
        domain.validate();
        detail::require_finite(w_u, "bust: w_u");
        detail::require_finite(d, "bust: d");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidSpec("bust: tau must be positive");
        if (tau >= domain.width()) throw InvalidSpec("bust: tau must be much smaller than the domain");
        if (w_u - 0.5 * tau < domain.s_min || w_u + 0.5 * tau > domain.s_max) {
            throw InvalidSpec("bust: biased interval must lie inside the domain");
        }
    }
};

namespace detail {

inline double link_span(const LinkSpec& link, const ScoreDomain& domain) {
    const double span = link_h(link, domain.s_max) - link_h(link, domain.s_min);
    if (!(span > 0.0)) {
        throw DegenerateDomain("link has no variation on the domain (h(S_M) == h(S_m))");
    }
    return span;
}

}  // namespace detail

// [h(w_u + d) - h(w_u)] / [h(S_M) - h(S_m)]
inline double bust(const LinkSpec& link, const BustConfig& cfg) {
    cfg.validate();
    const double span = detail::link_span(link, cfg.domain);
    return (link_h(link, cfg.w_u + cfg.d) - link_h(link, cfg.w_u)) / span;
}

// h'(w_u) / [h(S_M) - h(S_m)]
inline double blust(const LinkSpec& link, const ScoreDomain& domain, double w_u) {
    domain.validate();
    detail::require_finite(w_u, "blust: w_u");
    const double span = detail::link_span(link, domain);
    return link_eval(link, w_u).h_slope / span;
}

// Finite-tau displacement: solves the integrated zero-expected-gradient
// condition for the optimal offset and returns offset / tau.
inline double bust_simulate(const LinkSpec& link, const BustConfig& cfg) {
    cfg.validate();
    detail::link_span(link, cfg.domain);
    auto H = [&](double z) { return link_eval(link, z).H; };
    const double sm = cfg.domain.s_min;
    const double sM = cfg.domain.s_max;
    const double half = 0.5 * cfg.tau;
    const double rhs = (H(cfg.w_u + half + cfg.d) - H(cfg.w_u - half + cfg.d)) -
                       (H(cfg.w_u + half) - H(cfg.w_u - half));
    if (rhs == 0.0) return 0.0;
    auto g = [&](double delta) { return (H(sM + delta) - H(sM)) - (H(sm + delta) - H(sm)) - rhs; };

    // The left side is non-decreasing in delta; grow a bracket around 0.
    double lo = -cfg.tau;
    double hi = cfg.tau;
    for (int i = 0; i < 200 && g(lo) > 0.0; ++i) lo *= 2.0;
    for (int i = 0; i < 200 && g(hi) < 0.0; ++i) hi *= 2.0;
    const double delta = bisect_increasing(g, lo, hi);
    return delta / cfg.tau;
}

}  // namespace selective
