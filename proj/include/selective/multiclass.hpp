#pragma once

// Multi-class selective matching losses built on the composite Softmax
//
//   p_k(z) = e^{Q(z_k)/gamma} / sum_j e^{Q(z_j)/gamma},
//   H(z)   = gamma log sum_k e^{Q(z_k)/gamma},   h_k(z) = q(z_k) p_k(z),
//
// plus the decomposed (diagonal) loss, the Hessian of H, cross-entropy
// comparators and the generalized standard Softmax.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "composite.hpp"
#include "core.hpp"
#include "link.hpp"
#include "scalar_loss.hpp"

namespace selective {

using ScoreVector = std::vector<double>;

// Row-major dense K x K matrix.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    explicit DenseMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

namespace detail {

inline void require_scores(std::span<const double> z, const char* what) {
    if (z.size() < 2) throw DimensionMismatch(std::string(what) + ": need at least 2 classes");
    for (double v : z) require_finite(v, what);
}

inline void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionMismatch(std::string(what) + ": score vectors differ in length (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

// Per-class transform values and the stabilized softmax of Q/gamma.
struct SoftmaxState {
    std::vector<CompositeEval> evals;
    std::vector<double> p;
    double log_partition = 0.0;  // gamma * logsumexp(Q/gamma)
};

inline SoftmaxState softmax_state(const TransformSpec& spec, std::span<const double> z) {
    SoftmaxState st;
    st.evals.reserve(z.size());
    double m = -std::numeric_limits<double>::infinity();
    for (double zk : z) {
        st.evals.push_back(transform_eval(spec, zk));
        m = std::max(m, st.evals.back().Q / spec.gamma);
    }
    st.p.resize(z.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        st.p[k] = std::exp(st.evals[k].Q / spec.gamma - m);
        sum += st.p[k];
    }
    for (double& pk : st.p) pk /= sum;
    st.log_partition = spec.gamma * (m + std::log(sum));
    return st;
}

}  // namespace detail

inline std::vector<double> composite_softmax(const TransformSpec& spec, std::span<const double> z) {
    detail::require_scores(z, "composite_softmax");
    return detail::softmax_state(spec, z).p;
}

inline std::vector<double> mc_link(const TransformSpec& spec, std::span<const double> z) {
    detail::require_scores(z, "mc_link");
    const auto st = detail::softmax_state(spec, z);
    std::vector<double> h(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) h[k] = st.evals[k].q * st.p[k];
    return h;
}

inline double log_partition(const TransformSpec& spec, std::span<const double> z) {
    detail::require_scores(z, "log_partition");
    return detail::softmax_state(spec, z).log_partition;
}

inline double mc_matching_loss(const TransformSpec& spec, std::span<const double> s_hat,
                               std::span<const double> s) {
    detail::require_same_size(s_hat, s, "mc_matching_loss");
    detail::require_scores(s_hat, "mc_matching_loss");
    detail::require_scores(s, "mc_matching_loss");
    const auto sh = detail::softmax_state(spec, s_hat);
    const auto so = detail::softmax_state(spec, s);
    double lin = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) lin += (s_hat[k] - s[k]) * so.evals[k].q * so.p[k];
    return sh.log_partition - so.log_partition - lin;
}

inline std::vector<double> mc_matching_grad(const TransformSpec& spec, std::span<const double> s_hat,
                                            std::span<const double> s) {
    detail::require_same_size(s_hat, s, "mc_matching_grad");
    const auto hh = mc_link(spec, s_hat);
    const auto hs = mc_link(spec, s);
    std::vector<double> g(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) g[k] = hh[k] - hs[k];
    return g;
}

// Sum of independent scalar matching losses, one per class.
inline double diagonal_loss(const LinkSpec& link, std::span<const double> s_hat,
                            std::span<const double> s) {
    detail::require_same_size(s_hat, s, "diagonal_loss");
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) total += matching_loss(link, s_hat[k], s[k]);
    return total;
}

inline std::vector<double> diagonal_grad(const LinkSpec& link, std::span<const double> s_hat,
                                         std::span<const double> s) {
    detail::require_same_size(s_hat, s, "diagonal_grad");
    std::vector<double> g(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) g[k] = matching_grad(link, s_hat[k], s[k]);
    return g;
}

// d^2 H / dz_k dz_j = p_k {[k == j] q'(z_k) + (1/gamma)([k == j] - p_j) q(z_k) q(z_j)}.
inline DenseMatrix mc_hessian(const TransformSpec& spec, std::span<const double> z) {
    detail::require_scores(z, "mc_hessian");
    const auto st = detail::softmax_state(spec, z);
    const std::size_t K = z.size();
    DenseMatrix hess(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < K; ++j) {
            const double kron = (k == j) ? 1.0 : 0.0;
            hess(k, j) = st.p[k] * (kron * st.evals[k].q_slope +
                                    (kron - st.p[j]) * st.evals[k].q * st.evals[j].q / spec.gamma);
        }
    }
    // Symmetrize away rounding: the exact matrix is symmetric.
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = k + 1; j < K; ++j) {
            const double avg = 0.5 * (hess(k, j) + hess(j, k));
            hess(k, j) = avg;
            hess(j, k) = avg;
        }
    }
    return hess;
}

struct McCe {
    double loss = 0.0;
    std::vector<double> grad;
};

// gamma logsumexp(Q(s_hat)/gamma) - sum_k p_k(s) Q(s_hat_k).
inline McCe mc_ce_loss(const TransformSpec& spec, std::span<const double> s_hat,
                       std::span<const double> s) {
    detail::require_same_size(s_hat, s, "mc_ce_loss");
    detail::require_scores(s_hat, "mc_ce_loss");
    detail::require_scores(s, "mc_ce_loss");
    const auto sh = detail::softmax_state(spec, s_hat);
    const auto so = detail::softmax_state(spec, s);
    McCe r;
    r.loss = sh.log_partition;
    r.grad.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        r.loss -= so.p[k] * sh.evals[k].Q;
        r.grad[k] = sh.evals[k].q * (sh.p[k] - so.p[k]);
    }
    return r;
}

// gamma-regularized, shifted and scaled Softmax with per-class bias rho.
struct StandardSoftmaxSpec {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    std::vector<double> rho;  // empty means all ones

    void validate(std::size_t K) const {
        if (!(alpha > 0.0)) throw InvalidSpec("standard softmax: alpha must be positive");
        if (!std::isfinite(beta)) throw InvalidSpec("standard softmax: beta must be finite");
        if (!(gamma > 0.0)) throw InvalidSpec("standard softmax: gamma must be positive");
        if (!rho.empty()) {
            if (rho.size() != K) throw DimensionMismatch("standard softmax: rho must have K entries");
            for (double r : rho) {
                if (!(r > 0.0)) throw InvalidSpec("standard softmax: rho entries must be positive");
            }
        }
    }
};

struct StandardSoftmaxResult {
    std::vector<double> p_hat;
    std::vector<double> p;
    double matching_loss = 0.0;
    double ce_loss = 0.0;
    std::vector<double> grad;
};

namespace detail {

inline std::pair<std::vector<double>, double> standard_softmax(const StandardSoftmaxSpec& spec,
                                                               std::span<const double> z) {
    const std::size_t K = z.size();
    std::vector<double> logits(K);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        const double log_rho = spec.rho.empty() ? 0.0 : std::log(spec.rho[k]);
        logits[k] = (log_rho + spec.alpha * (z[k] - spec.beta)) / spec.gamma;
        m = std::max(m, logits[k]);
    }
    double sum = 0.0;
    std::vector<double> p(K);
    for (std::size_t k = 0; k < K; ++k) {
        p[k] = std::exp(logits[k] - m);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return {p, spec.gamma * (m + std::log(sum))};
}

}  // namespace detail

inline StandardSoftmaxResult standard_softmax_suite(const StandardSoftmaxSpec& spec,
                                                    std::span<const double> s_hat,
                                                    std::span<const double> s) {
    detail::require_same_size(s_hat, s, "standard_softmax_suite");
    detail::require_scores(s_hat, "standard_softmax_suite");
    detail::require_scores(s, "standard_softmax_suite");
    spec.validate(s.size());
    auto [p_hat, H_hat] = detail::standard_softmax(spec, s_hat);
    auto [p, H_obs] = detail::standard_softmax(spec, s);
    StandardSoftmaxResult r;
    r.matching_loss = H_hat - H_obs;
    r.ce_loss = H_hat;
    r.grad.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        r.matching_loss -= spec.alpha * (s_hat[k] - s[k]) * p[k];
        r.ce_loss -= spec.alpha * (s_hat[k] - spec.beta) * p[k];
        r.grad[k] = spec.alpha * (p_hat[k] - p[k]);
    }
    r.p_hat = std::move(p_hat);
    r.p = std::move(p);
    return r;
}

}  // namespace selective
