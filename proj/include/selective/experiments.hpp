#pragma once

// Desk-scale reproductions: 2-D underspecification with a linear model,
// stochastic prediction bias, the re-weighted square loss counterexample,
// and curve emission for links / transforms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "composite.hpp"
#include "core.hpp"
#include "curves.hpp"
#include "link.hpp"
#include "multiclass.hpp"
#include "scalar_loss.hpp"

namespace selective {

using LossSpec = std::variant<LinkSpec, TransformSpec>;

inline double loss_value(const LossSpec& spec, double s_hat, double s) {
    if (const auto* l = std::get_if<LinkSpec>(&spec)) return matching_loss(*l, s_hat, s);
    return amplified_loss(std::get<TransformSpec>(spec), s_hat, s);
}

inline double loss_grad(const LossSpec& spec, double s_hat, double s) {
    if (const auto* l = std::get_if<LinkSpec>(&spec)) return matching_grad(*l, s_hat, s);
    return amplified_grad(std::get<TransformSpec>(spec), s_hat, s);
}

// ---------------------------------------------------------------------------
// Underspecification

struct Example2d {
    double x1 = 0.0;
    double x2 = 0.0;
    double label = 0.0;
};

struct UnderspecConfig {
    std::vector<Example2d> dataset;
    LossSpec loss = LinkSpec{};
    double learning_rate = 1e-3;
    std::size_t iterations = 200000;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;  // on the summed-gradient norm

    void validate() const {
        if (dataset.empty()) throw InvalidSpec("underspec: dataset is empty");
        for (const auto& e : dataset) {
            detail::require_finite(e.x1, "underspec: x1");
            detail::require_finite(e.x2, "underspec: x2");
            detail::require_finite(e.label, "underspec: label");
        }
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw InvalidSpec("underspec: learning_rate must be positive");
        }
        if (iterations == 0) throw InvalidSpec("underspec: iterations must be positive");
        std::visit([](const auto& s) { s.validate(); }, loss);
    }
};

struct UnderspecResult {
    std::array<double, 2> weights{};
    std::vector<double> predictions;
    double mae_high = 0.0;
    double mae_low = 0.0;
    double split = 0.0;  // labels >= split count as high
    double final_loss = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool tail_monotone = true;  // loss non-increasing over the final 10% of iterations
};

// Low labels low_min..low_max follow x2 with x1 in {1, 3}; high labels
// high_min..high_max follow x1 with x2 in {1, 3}. Each (label, duplicate)
// example is repeated `*_repeat` times.
struct UnderspecDataOptions {
    int low_min = -10;
    int low_max = -1;
    int high_min = 6;
    int high_max = 10;
    int low_repeat = 1;
    int high_repeat = 1;
};

inline std::vector<Example2d> underspec_dataset(const UnderspecDataOptions& o = {}) {
    if (o.low_min > o.low_max || o.high_min > o.high_max || o.low_repeat < 1 || o.high_repeat < 1) {
        throw InvalidSpec("underspec dataset: empty label range or non-positive repeat");
    }
    std::vector<Example2d> data;
    for (int s = o.low_min; s <= o.low_max; ++s) {
        for (double dup : {1.0, 3.0}) {
            for (int r = 0; r < o.low_repeat; ++r) data.push_back({dup, double(s), double(s)});
        }
    }
    for (int s = o.high_min; s <= o.high_max; ++s) {
        for (double dup : {1.0, 3.0}) {
            for (int r = 0; r < o.high_repeat; ++r) data.push_back({double(s), dup, double(s)});
        }
    }
    return data;
}

namespace detail {

struct UnderspecEval {
    double loss = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
};

inline UnderspecEval underspec_eval(const UnderspecConfig& cfg, double w1, double w2) {
    UnderspecEval r;
    for (const auto& e : cfg.dataset) {
        const double pred = w1 * e.x1 + w2 * e.x2;
        r.loss += loss_value(cfg.loss, pred, e.label);
        const double g = loss_grad(cfg.loss, pred, e.label);
        r.g1 += g * e.x1;
        r.g2 += g * e.x2;
    }
    return r;
}

}  // namespace detail

// Full-batch fixed-step gradient descent on the summed loss of s_hat = w.x.
inline UnderspecResult run_underspec(const UnderspecConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    double w1 = init(rng);
    double w2 = init(rng);

    UnderspecResult res;
    auto ev = detail::underspec_eval(cfg, w1, w2);
    const double initial_loss = ev.loss;
    const double divergence_limit = 10.0 * std::max(initial_loss, 1e-300);
    const std::size_t tail_start = cfg.iterations - cfg.iterations / 10;
    double prev_loss = ev.loss;
    std::size_t it = 0;
    for (; it < cfg.iterations; ++it) {
        const double gnorm = std::hypot(ev.g1, ev.g2);
        if (gnorm < cfg.tolerance) {
            res.converged = true;
            break;
        }
        w1 -= cfg.learning_rate * ev.g1;
        w2 -= cfg.learning_rate * ev.g2;
        ev = detail::underspec_eval(cfg, w1, w2);
        if (!std::isfinite(ev.loss) || ev.loss > divergence_limit) {
            throw Diverged("underspec: loss grew beyond 10x its initial value at iteration " +
                           std::to_string(it + 1) + "; lower the learning rate");
        }
        if (it >= tail_start && ev.loss > prev_loss) res.tail_monotone = false;
        prev_loss = ev.loss;
    }
    res.iterations = it;
    res.weights = {w1, w2};
    res.final_loss = ev.loss;
    res.gradient_norm = std::hypot(ev.g1, ev.g2);

    double lo = cfg.dataset.front().label, hi = lo;
    for (const auto& e : cfg.dataset) {
        lo = std::min(lo, e.label);
        hi = std::max(hi, e.label);
    }
    res.split = 0.5 * (lo + hi);
    double sum_hi = 0.0, sum_lo = 0.0;
    std::size_t n_hi = 0, n_lo = 0;
    for (const auto& e : cfg.dataset) {
        const double pred = w1 * e.x1 + w2 * e.x2;
        res.predictions.push_back(pred);
        if (e.label >= res.split) {
            sum_hi += std::fabs(pred - e.label);
            ++n_hi;
        } else {
            sum_lo += std::fabs(pred - e.label);
            ++n_lo;
        }
    }
    res.mae_high = n_hi ? sum_hi / double(n_hi) : 0.0;
    res.mae_low = n_lo ? sum_lo / double(n_lo) : 0.0;
    return res;
}

inline CurveTable underspec_table(const UnderspecConfig& cfg, const UnderspecResult& r) {
    CurveTable t;
    std::vector<double> x1, x2, label;
    for (const auto& e : cfg.dataset) {
        x1.push_back(e.x1);
        x2.push_back(e.x2);
        label.push_back(e.label);
    }
    t.add_column("x1", std::move(x1));
    t.add_column("x2", std::move(x2));
    t.add_column("label", std::move(label));
    t.add_column("prediction", r.predictions);
    t.metadata["w1"] = format_double(r.weights[0]);
    t.metadata["w2"] = format_double(r.weights[1]);
    t.metadata["mae_high"] = format_double(r.mae_high);
    t.metadata["mae_low"] = format_double(r.mae_low);
    t.metadata["split"] = format_double(r.split);
    t.metadata["final_loss"] = format_double(r.final_loss);
    t.metadata["gradient_norm"] = format_double(r.gradient_norm);
    t.metadata["iterations"] = std::to_string(r.iterations);
    t.metadata["converged"] = r.converged ? "true" : "false";
    t.metadata["tail_monotone"] = r.tail_monotone ? "true" : "false";
    return t;
}

// ---------------------------------------------------------------------------
// Stochastic prediction bias

struct StochasticConfig {
    LinkSpec link = LinkSpec::make(LinkFamily::exponential);
    std::vector<WeightedScores> populations;
    std::vector<double> parameters;  // x-axis value per population; index if empty
    std::vector<double> alphas = {1.0, 2.0, 4.0, 8.0};

    void validate() const {
        link.validate();
        if (populations.empty()) throw InvalidSpec("stochastic: no populations");
        for (const auto& p : populations) p.validate();
        if (!parameters.empty() && parameters.size() != populations.size()) {
            throw DimensionMismatch("stochastic: one parameter per population required");
        }
        if (alphas.empty()) throw InvalidSpec("stochastic: no alphas");
        for (double a : alphas) {
            if (!(a > 0.0) || !std::isfinite(a)) throw InvalidSpec("stochastic: alphas must be positive");
        }
    }
};

// Proper prediction of a population; the domain is the population's range.
inline double stochastic_prediction(const LinkSpec& link, const WeightedScores& pop) {
    pop.validate();
    const double lo = pop.min_score();
    const double hi = pop.max_score();
    if (lo == hi) return lo;
    const double pad = 1e-9 * (1.0 + (hi - lo));
    return proper_prediction(link, pop, ScoreDomain(lo - pad, hi + pad, 2));
}

// (1/alpha) log E[e^{alpha s}], evaluated stably.
inline double log_mean_exp_prediction(double alpha, const WeightedScores& pop) {
    double m = -std::numeric_limits<double>::infinity();
    for (auto [s, w] : pop.entries) m = std::max(m, alpha * s);
    double acc = 0.0;
    for (auto [s, w] : pop.entries) acc += w * std::exp(alpha * s - m);
    return (m + std::log(acc / pop.total_weight())) / alpha;
}

inline std::string alpha_label(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

inline CurveTable run_stochastic(const StochasticConfig& cfg) {
    cfg.validate();
    CurveTable t;
    std::vector<double> param, mean;
    for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
        param.push_back(cfg.parameters.empty() ? double(i) : cfg.parameters[i]);
        mean.push_back(cfg.populations[i].mean());
    }
    t.add_column("parameter", std::move(param));
    t.add_column("mean", std::move(mean));
    const bool exponential = cfg.link.family == LinkFamily::exponential;
    for (double a : cfg.alphas) {
        LinkSpec link = cfg.link;
        link.alpha = a;
        std::vector<double> pred, closed;
        for (const auto& pop : cfg.populations) {
            pred.push_back(stochastic_prediction(link, pop));
            if (exponential) closed.push_back(log_mean_exp_prediction(a, pop));
        }
        t.add_column("s_hat_alpha_" + alpha_label(a), std::move(pred));
        if (exponential) t.add_column("closed_form_alpha_" + alpha_label(a), std::move(closed));
    }
    t.metadata["link"] = std::string(to_string(cfg.link.family));
    t.metadata["beta"] = format_double(cfg.link.beta);
    return t;
}

// One large score 0.1 + 0.05 k and k small scores 0.05: mean fixed at 0.1.
inline StochasticConfig stochastic_large_vs_many(std::size_t max_k = 18) {
    StochasticConfig cfg;
    for (std::size_t k = 1; k <= max_k; ++k) {
        WeightedScores pop;
        const double big = 0.1 + 0.05 * double(k);
        pop.entries.push_back({big, 1.0});
        pop.entries.push_back({0.05, double(k)});
        cfg.populations.push_back(pop);
        cfg.parameters.push_back(big);
    }
    return cfg;
}

// Two equally weighted scores mean +- deviation.
inline StochasticConfig stochastic_symmetric(double mean, double max_dev = 0.25, std::size_t steps = 26) {
    StochasticConfig cfg;
    for (std::size_t i = 0; i < steps; ++i) {
        const double dev = max_dev * double(i) / double(steps - 1);
        WeightedScores pop;
        pop.entries.push_back({mean - dev, 1.0});
        pop.entries.push_back({mean + dev, 1.0});
        cfg.populations.push_back(pop);
        cfg.parameters.push_back(dev);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Re-weighted square loss counterexample

struct ReweightOptions {
    double kappa = 0.5;
    double delta = 0.5;
    LinkSpec reference = LinkSpec::make(LinkFamily::sigmoid, 1.5, 2.0);
};

namespace detail {

inline std::string score_label(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

// True when some second difference is negative beyond rounding.
inline bool has_negative_curvature(const std::vector<double>& v) {
    double scale = 1.0;
    for (double x : v) scale = std::max(scale, std::fabs(x));
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i + 1] - 2.0 * v[i] + v[i - 1] < -1e-12 * scale) return true;
    }
    return false;
}

}  // namespace detail

// Square loss (s_hat - s)^2 / 2 weighted by kappa (z - min s + delta) with z
// the observed score, the predicted score, or both (product of weights).
inline CurveTable run_reweighting_demo(const ScoreDomain& domain, const std::vector<double>& observed,
                                       const ReweightOptions& opt = {}) {
    domain.validate();
    if (observed.empty()) throw InvalidSpec("reweighting: no observed scores");
    for (double s : observed) detail::require_finite(s, "reweighting: observed score");
    opt.reference.validate();
    const double s_min = *std::min_element(observed.begin(), observed.end());
    const double s_max = *std::max_element(observed.begin(), observed.end());
    auto weight = [&](double z) { return opt.kappa * (z - s_min + opt.delta); };
    auto sq = [](double a, double b) { return 0.5 * (a - b) * (a - b); };

    const char* const schemes[] = {"observed", "predicted", "both"};
    auto scheme_weight = [&](int scheme, double sh, double s) {
        switch (scheme) {
            case 0: return weight(s);
            case 1: return weight(sh);
            default: return weight(s) * weight(sh);
        }
    };

    CurveTable t;
    const auto grid = domain.grid();
    t.add_column("s_hat", grid);
    for (int sc = 0; sc < 3; ++sc) {
        for (double s : observed) {
            std::vector<double> col;
            col.reserve(grid.size());
            for (double sh : grid) col.push_back(scheme_weight(sc, sh, s) * sq(sh, s));
            const std::string name = std::string(schemes[sc]) + "_s" + detail::score_label(s);
            t.metadata[name + ".nonconvex"] = detail::has_negative_curvature(col) ? "true" : "false";
            t.add_column(name, std::move(col));
        }
    }
    for (double s : observed) {
        std::vector<double> col;
        for (double sh : grid) col.push_back(matching_loss(opt.reference, sh, s));
        t.add_column("selective_s" + detail::score_label(s), std::move(col));
    }

    // Overestimation of the lowest score relative to underestimation of the
    // highest, against the same ratio for the selective reference.
    const double ref_over = matching_loss(opt.reference, s_max, s_min);
    const double ref_under = matching_loss(opt.reference, s_min, s_max);
    const double ref_ratio = ref_over / ref_under;
    t.metadata["selective.ratio"] = format_double(ref_ratio);
    for (int sc = 0; sc < 3; ++sc) {
        const double over = scheme_weight(sc, s_max, s_min) * sq(s_max, s_min);
        const double under = scheme_weight(sc, s_min, s_max) * sq(s_min, s_max);
        const std::string key = schemes[sc];
        if (under > 0.0) {
            const double ratio = over / under;
            t.metadata[key + ".ratio"] = format_double(ratio);
            t.metadata[key + ".under_penalizes"] = ratio < ref_ratio ? "true" : "false";
        } else {
            t.metadata[key + ".ratio"] = "undefined";
            t.metadata[key + ".under_penalizes"] = "false";
        }
    }
    t.metadata["kappa"] = format_double(opt.kappa);
    t.metadata["delta"] = format_double(opt.delta);
    return t;
}

// ---------------------------------------------------------------------------
// Curve emission

struct NamedSpec {
    std::string label;
    LossSpec spec;
};

inline CurveTable emit_curves(const std::vector<NamedSpec>& specs, const ScoreDomain& domain,
                              const std::vector<double>& observed) {
    domain.validate();
    CurveTable t;
    const auto grid = domain.grid();
    t.add_column("z", grid);
    for (const auto& ns : specs) {
        std::visit([](const auto& s) { s.validate(); }, ns.spec);
        const std::string p = ns.label + ".";
        std::vector<double> h, slope, prim;
        if (const auto* link = std::get_if<LinkSpec>(&ns.spec)) {
            for (double z : grid) {
                const LinkValue v = link_eval(*link, z);
                h.push_back(v.h);
                slope.push_back(v.h_slope);
                prim.push_back(v.H);
            }
            t.add_column(p + "h", std::move(h));
            t.add_column(p + "h_slope", std::move(slope));
            t.add_column(p + "H", std::move(prim));
            t.metadata[p + "kind"] = "link";
            t.metadata[p + "family"] = std::string(to_string(link->family));
            t.metadata[p + "alpha"] = format_double(link->alpha);
            t.metadata[p + "beta"] = format_double(link->beta);
        } else {
            const auto& tr = std::get<TransformSpec>(ns.spec);
            std::vector<double> q, Q, prob;
            for (double z : grid) {
                const CompositeEval e = transform_eval(tr, z);
                q.push_back(e.q);
                Q.push_back(e.Q);
                prob.push_back(e.p);
                h.push_back(e.h);
                slope.push_back(e.h_slope);
                prim.push_back(e.H);
            }
            t.add_column(p + "q", std::move(q));
            t.add_column(p + "Q", std::move(Q));
            t.add_column(p + "p", std::move(prob));
            t.add_column(p + "h", std::move(h));
            t.add_column(p + "h_slope", std::move(slope));
            t.add_column(p + "H", std::move(prim));
            t.metadata[p + "kind"] = "transform";
            t.metadata[p + "family"] = std::string(to_string(tr.family));
            t.metadata[p + "alpha"] = format_double(tr.alpha);
            t.metadata[p + "beta"] = format_double(tr.beta);
            t.metadata[p + "gamma"] = format_double(tr.gamma);
        }
        for (double s : observed) {
            std::vector<double> loss;
            loss.reserve(grid.size());
            for (double z : grid) loss.push_back(loss_value(ns.spec, z, s));
            t.add_column(p + "loss_s" + detail::score_label(s), std::move(loss));
        }
    }
    return t;
}

// Multi-class loss profiles: component k of s_hat sweeps the grid while the
// rest stay at s.
inline CurveTable emit_multiclass_projection(const TransformSpec& spec, const LinkSpec& diagonal,
                                             const ScoreDomain& domain, const ScoreVector& s) {
    domain.validate();
    detail::require_scores(s, "multiclass projection");
    CurveTable t;
    const auto grid = domain.grid();
    t.add_column("z", grid);
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::vector<double> mc, diag;
        ScoreVector s_hat = s;
        for (double z : grid) {
            s_hat[k] = z;
            mc.push_back(mc_matching_loss(spec, s_hat, s));
            diag.push_back(diagonal_loss(diagonal, s_hat, s));
        }
        const std::string tag = "k" + std::to_string(k) + "_s" + detail::score_label(s[k]);
        t.add_column("composite.loss_" + tag, std::move(mc));
        t.add_column("diagonal.loss_" + tag, std::move(diag));
    }
    t.metadata["composite.family"] = std::string(to_string(spec.family));
    t.metadata["composite.beta"] = format_double(spec.beta);
    t.metadata["diagonal.family"] = std::string(to_string(diagonal.family));
    return t;
}

// ---------------------------------------------------------------------------
// Presets

inline std::vector<NamedSpec> figure2_specs() {
    return {
        {"low_norm", LinkSpec::make(LinkFamily::sigmoid, 1.5, 0.0)},
        {"high_score", LinkSpec::make(LinkFamily::sigmoid, 1.5, 3.0)},
        {"low_score", LinkSpec::make(LinkFamily::sigmoid, 1.5, -3.0)},
        {"high_norm", LinkSpec::make(LinkFamily::sinh, 0.5, 0.0)},
    };
}

inline std::vector<NamedSpec> figure3_specs() {
    return {
        {"sigmoid_scaling", TransformSpec::make(TransformFamily::sigmoid_scaling)},
        {"exponential", TransformSpec::make(TransformFamily::exponential, 0.5)},
        {"anti_exponential", TransformSpec::make(TransformFamily::anti_exponential, 0.5)},
        {"sinh", TransformSpec::make(TransformFamily::sinh, 0.5)},
    };
}

inline const std::vector<double>& figure_observed_scores() {
    static const std::vector<double> s = {-3.0, 0.0, 3.0};
    return s;
}

struct NamedUnderspec {
    std::string name;
    UnderspecConfig config;
};

// Right / left shifted sigmoid on the base dataset, and a centered sigmoid
// on the base dataset (low majority) and on the flipped one (high majority).
inline std::vector<NamedUnderspec> appendix_f_runs(std::uint64_t seed = 0) {
    UnderspecDataOptions flipped;
    flipped.high_repeat = 4;
    auto make = [&](LinkSpec link, const UnderspecDataOptions& data) {
        UnderspecConfig c;
        c.dataset = underspec_dataset(data);
        c.loss = link;
        c.learning_rate = 1e-3;
        c.iterations = 200000;
        c.seed = seed;
        return c;
    };
    return {
        {"right-shifted-sigmoid", make(LinkSpec::make(LinkFamily::sigmoid, 1.5, 4.0), {})},
        {"left-shifted-sigmoid", make(LinkSpec::make(LinkFamily::sigmoid, 1.5, -4.0), {})},
        {"centered-sigmoid", make(LinkSpec::make(LinkFamily::sigmoid, 1.0, 0.0), {})},
        {"centered-sigmoid-flipped", make(LinkSpec::make(LinkFamily::sigmoid, 1.0, 0.0), flipped)},
    };
}

// Both stochastic panels stacked, tagged by a "panel" column: 0 for one
// large score vs many small ones, 1 and 2 for mean 0.3 / 0.5 +- deviation.
inline CurveTable appendix_h_table(const LinkSpec& link = LinkSpec::make(LinkFamily::exponential)) {
    std::vector<StochasticConfig> panels = {stochastic_large_vs_many(), stochastic_symmetric(0.3),
                                            stochastic_symmetric(0.5)};
    CurveTable out;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        panels[i].link = link;
        CurveTable t = run_stochastic(panels[i]);
        CurveTable tagged;
        tagged.add_column("panel", std::vector<double>(t.rows(), double(i)));
        for (auto& [name, values] : t.columns) tagged.add_column(name, values);
        out.append_rows(tagged);
        out.metadata = t.metadata;
    }
    return out;
}

inline CurveTable figure4_table(const ScoreDomain& domain) {
    const ScoreVector s = {3.0, 0.0, -3.0};
    const LinkSpec diagonal = LinkSpec::make(LinkFamily::sigmoid);
    CurveTable out;
    for (double beta : {-2.0, 0.0, 2.0}) {
        const TransformSpec tr = TransformSpec::make(TransformFamily::sinh, 1.0, beta);
        CurveTable t = emit_multiclass_projection(tr, diagonal, domain, s);
        if (out.columns.empty()) out.add_column("z", t.column("z"));
        const std::string prefix = "beta" + detail::score_label(beta) + ".";
        for (auto& [name, values] : t.columns) {
            if (name != "z") out.add_column(prefix + name, values);
        }
        for (auto& [k, v] : t.metadata) out.metadata[prefix + k] = v;
    }
    return out;
}

}  // namespace selective
