#pragma once

// Command-line front end. Every number it prints comes from a library call.
//
// Exit codes: 0 success, 1 validation negative, 2 usage / configuration,
// 3 numeric failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "composite.hpp"
#include "config.hpp"
#include "core.hpp"
#include "curves.hpp"
#include "experiments.hpp"
#include "link.hpp"
#include "multiclass.hpp"
#include "recipes.hpp"
#include "scalar_loss.hpp"
#include "validity.hpp"

namespace selective {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitUsage = 2, kExitNumeric = 3 };

class UsageError : public Error {
public:
    using Error::Error;
};

namespace cli {

struct Options {
    std::string spec;
    std::string output;
    std::string format = "csv";
    std::string domain;
    std::string preset;
    std::string link;
    std::string batch;
    std::vector<std::string> pairs;
    std::string profile;
    std::string arity = "scalar";
    std::uint64_t seed = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ConfigDocument load_spec(const Options& o) {
    if (o.spec.empty()) return {};
    return parse_config(read_file(o.spec));
}

inline std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used == 0 || used != item.size()) throw UsageError(what + ": '" + item + "' is not a number");
        if (!std::isfinite(v)) throw UsageError(what + ": values must be finite");
        out.push_back(v);
    }
    return out;
}

// --domain "min,max,points" overrides the spec file's domain.
inline ScoreDomain resolve_domain(const Options& o, const ConfigDocument& doc, ScoreDomain fallback) {
    if (!o.domain.empty()) {
        const auto v = parse_numbers(o.domain, "--domain");
        if (v.size() != 3 || v[2] < 2 || v[2] != std::floor(v[2])) {
            throw UsageError("--domain expects \"min,max,points\" with integer points >= 2");
        }
        try {
            return ScoreDomain(v[0], v[1], static_cast<std::size_t>(v[2]));
        } catch (const InvalidSpec& e) {
            throw UsageError(std::string("--domain: ") + e.what());
        }
    }
    if (doc.domain) return *doc.domain;
    return fallback;
}

inline void emit(const CurveTable& table, const Options& o, std::ostream& out) {
    std::ostringstream buf;
    if (o.format == "json") {
        write_json(table, buf);
    } else {
        write_csv(table, buf);
    }
    if (o.output.empty()) {
        out << buf.str();
        return;
    }
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + o.output + "'");
    f << buf.str();
}

inline void emit_json(const Json& doc, const Options& o, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (o.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + o.output + "'");
    f << text;
}

inline std::vector<std::pair<double, double>> parse_pairs(const std::vector<std::string>& raw) {
    std::vector<std::pair<double, double>> out;
    for (const auto& flag : raw) {
        std::stringstream ss(flag);
        std::string item;
        while (std::getline(ss, item, ';')) {
            if (item.find_first_not_of(" \t") == std::string::npos) continue;
            const auto v = parse_numbers(item, "--pairs");
            if (v.size() != 2) throw UsageError("--pairs: each pair is \"s_hat,s\"");
            out.emplace_back(v[0], v[1]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

inline CurveTable eval_pairs_link(const LinkSpec& link, const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> sh, s, h, H, slope, loss, grad;
    for (auto [a, b] : pairs) {
        const LinkValue v = link_eval(link, a);
        sh.push_back(a);
        s.push_back(b);
        h.push_back(v.h);
        H.push_back(v.H);
        slope.push_back(v.h_slope);
        loss.push_back(matching_loss(link, a, b));
        grad.push_back(matching_grad(link, a, b));
    }
    CurveTable t;
    t.add_column("s_hat", sh);
    t.add_column("s", s);
    t.add_column("h", h);
    t.add_column("H", H);
    t.add_column("h_slope", slope);
    t.add_column("loss", loss);
    t.add_column("grad", grad);
    t.metadata["family"] = std::string(to_string(link.family));
    return t;
}

inline CurveTable eval_pairs_transform(const TransformSpec& tr, const ScoreDomain& domain,
                                       const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> sh, s, q, Q, f, p, h, H, slope, loss, grad, ce, ce_grad;
    // Cross entropy needs an injective composite Sigmoid on the domain.
    const bool ce_ok = validate_transform(tr, domain).certified();
    for (auto [a, b] : pairs) {
        const CompositeEval e = transform_eval(tr, a);
        sh.push_back(a);
        s.push_back(b);
        q.push_back(e.q);
        Q.push_back(e.Q);
        f.push_back(e.f);
        p.push_back(e.p);
        h.push_back(e.h);
        H.push_back(e.H);
        slope.push_back(e.h_slope);
        loss.push_back(amplified_loss(tr, a, b));
        grad.push_back(amplified_grad(tr, a, b));
        if (ce_ok) {
            const CompositeCe c = ce_loss_composite(tr, a, b);
            ce.push_back(c.loss);
            ce_grad.push_back(c.grad);
        }
    }
    CurveTable t;
    t.add_column("s_hat", sh);
    t.add_column("s", s);
    t.add_column("q", q);
    t.add_column("Q", Q);
    t.add_column("f", f);
    t.add_column("p", p);
    t.add_column("h", h);
    t.add_column("H", H);
    t.add_column("h_slope", slope);
    t.add_column("loss", loss);
    t.add_column("grad", grad);
    if (ce_ok) {
        t.add_column("ce_loss", ce);
        t.add_column("ce_grad", ce_grad);
    } else {
        t.metadata["ce"] = "omitted: transform not certified on the domain";
    }
    t.metadata["family"] = std::string(to_string(tr.family));
    return t;
}

// Batch multi-class evaluation: columns s_1..s_K and s_hat_1..s_hat_K.
inline CurveTable eval_batch(const ConfigDocument& doc, const CurveTable& in) {
    std::size_t K = 0;
    while (in.has_column("s_" + std::to_string(K + 1))) ++K;
    if (K < 2) throw UsageError("--batch: expected columns s_1..s_K with K >= 2");
    for (std::size_t k = 1; k <= K; ++k) {
        if (!in.has_column("s_hat_" + std::to_string(k))) {
            throw UsageError("--batch: missing column s_hat_" + std::to_string(k));
        }
    }
    std::vector<double> loss;
    std::vector<std::vector<double>> grads(K);
    for (std::size_t r = 0; r < in.rows(); ++r) {
        ScoreVector s(K), sh(K);
        for (std::size_t k = 0; k < K; ++k) {
            s[k] = in.column("s_" + std::to_string(k + 1))[r];
            sh[k] = in.column("s_hat_" + std::to_string(k + 1))[r];
        }
        std::vector<double> g;
        if (doc.transform) {
            loss.push_back(mc_matching_loss(*doc.transform, sh, s));
            g = mc_matching_grad(*doc.transform, sh, s);
        } else {
            loss.push_back(diagonal_loss(*doc.link, sh, s));
            g = diagonal_grad(*doc.link, sh, s);
        }
        for (std::size_t k = 0; k < K; ++k) grads[k].push_back(g[k]);
    }
    CurveTable t;
    t.add_column("loss", loss);
    for (std::size_t k = 0; k < K; ++k) t.add_column("grad_" + std::to_string(k + 1), grads[k]);
    t.metadata["construction"] = doc.transform ? "composite_softmax" : "diagonal_link";
    return t;
}

inline int cmd_eval(const Options& o, std::ostream& out) {
    const ConfigDocument doc = load_spec(o);
    if (!doc.link && !doc.transform) throw UsageError("eval: --spec must define 'link' or 'transform'");
    if (!o.batch.empty()) {
        std::ifstream in(o.batch, std::ios::binary);
        if (!in) throw UsageError("cannot open '" + o.batch + "'");
        emit(eval_batch(doc, read_csv(in)), o, out);
        return kExitOk;
    }
    const auto pairs = parse_pairs(o.pairs);
    if (pairs.empty()) {
        throw UsageError("eval: no (s_hat, s) pairs; use --pairs \"s_hat,s[;s_hat,s...]\" or --batch FILE");
    }
    if (doc.link) {
        emit(eval_pairs_link(*doc.link, pairs), o, out);
    } else {
        emit(eval_pairs_transform(*doc.transform, resolve_domain(o, doc, ScoreDomain{}), pairs), o, out);
    }
    return kExitOk;
}

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const ConfigDocument doc = load_spec(o);
    if (!doc.link && !doc.transform) throw UsageError("validate: --spec must define 'link' or 'transform'");
    const ScoreDomain domain = resolve_domain(o, doc, ScoreDomain{});
    ValidityReport r;
    if (doc.link) {
        r = validate_link(*doc.link, domain);
    } else {
        if (auto w = shifted_power_warning(*doc.transform)) err << "warning: " << *w << '\n';
        r = validate_transform(*doc.transform, domain);
    }
    out << "verdict: " << to_string(r.verdict) << '\n';
    out << "method: " << to_string(r.method) << '\n';
    out << "margin: " << format_double(r.margin) << '\n';
    out << "witnesses: " << r.witnesses.size() << '\n';
    const std::size_t shown = std::min<std::size_t>(r.witnesses.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        out << "  z=" << format_double(r.witnesses[i].z) << " value=" << format_double(r.witnesses[i].value)
            << '\n';
    }
    if (shown < r.witnesses.size()) out << "  ... " << (r.witnesses.size() - shown) << " more\n";
    if (!o.output.empty()) emit_json(to_json(r), o, out);
    return r.certified() ? kExitOk : kExitInvalid;
}

inline int cmd_design(const Options& o, std::ostream& out) {
    const auto profile = profile_from_string(o.profile);
    if (!profile) {
        throw UsageError("design: unknown profile '" + o.profile +
                         "' (expected low_norm, high_norm, high_score, low_score)");
    }
    const auto arity = arity_from_string(o.arity);
    if (!arity) throw UsageError("design: unknown arity '" + o.arity + "' (expected scalar, multiclass)");
    emit_json(to_json(recipe(*profile, *arity)), o, out);
    return kExitOk;
}

inline std::vector<double> observed_scores(const ConfigDocument& doc) {
    return doc.experiment.observed ? *doc.experiment.observed : figure_observed_scores();
}

inline void require_preset(const Options& o, const char* expected, const char* sub) {
    if (!o.preset.empty() && o.preset != expected) {
        throw UsageError(std::string("experiment ") + sub + ": unknown preset '" + o.preset +
                         "' (expected " + expected + ")");
    }
}

inline int cmd_underspec(const Options& o, std::ostream& out) {
    require_preset(o, "appendix-f", "underspec");
    const ConfigDocument doc = load_spec(o);
    std::vector<NamedUnderspec> runs;
    if (!o.preset.empty()) {
        runs = appendix_f_runs(o.seed);
        if (!o.link.empty()) {
            std::vector<NamedUnderspec> pick;
            for (auto& r : runs) {
                if (r.name == o.link) pick.push_back(r);
            }
            if (pick.empty()) {
                throw UsageError("experiment underspec: unknown --link '" + o.link +
                                 "' (expected right-shifted-sigmoid, left-shifted-sigmoid, "
                                 "centered-sigmoid, centered-sigmoid-flipped)");
            }
            runs = pick;
        }
    } else {
        if (!doc.link && !doc.transform) {
            throw UsageError("experiment underspec: give --preset appendix-f or a --spec with a loss");
        }
        UnderspecDataOptions data;
        if (doc.experiment.low_repeat) data.low_repeat = *doc.experiment.low_repeat;
        if (doc.experiment.high_repeat) data.high_repeat = *doc.experiment.high_repeat;
        UnderspecConfig c;
        c.dataset = underspec_dataset(data);
        if (doc.link) c.loss = *doc.link; else c.loss = *doc.transform;
        if (doc.experiment.learning_rate) c.learning_rate = *doc.experiment.learning_rate;
        if (doc.experiment.iterations) c.iterations = *doc.experiment.iterations;
        c.seed = o.seed;
        runs.push_back({"custom", c});
    }
    for (auto& r : runs) {
        try {
            r.config.validate();
        } catch (const InvalidSpec& e) {
            throw ConfigError(e.what());
        }
    }

    if (runs.size() == 1) {
        const UnderspecResult res = run_underspec(runs[0].config);
        CurveTable t = underspec_table(runs[0].config, res);
        t.metadata["run"] = runs[0].name;
        t.metadata["seed"] = std::to_string(o.seed);
        emit(t, o, out);
        return kExitOk;
    }
    CurveTable t;
    std::vector<double> run, w1, w2, hi, lo, iters, conv;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const UnderspecResult res = run_underspec(runs[i].config);
        run.push_back(double(i));
        w1.push_back(res.weights[0]);
        w2.push_back(res.weights[1]);
        hi.push_back(res.mae_high);
        lo.push_back(res.mae_low);
        iters.push_back(double(res.iterations));
        conv.push_back(res.converged ? 1.0 : 0.0);
        t.metadata["run." + std::to_string(i)] = runs[i].name;
    }
    t.add_column("run", run);
    t.add_column("w1", w1);
    t.add_column("w2", w2);
    t.add_column("mae_high", hi);
    t.add_column("mae_low", lo);
    t.add_column("iterations", iters);
    t.add_column("converged", conv);
    t.metadata["seed"] = std::to_string(o.seed);
    emit(t, o, out);
    return kExitOk;
}

inline int cmd_stochastic(const Options& o, std::ostream& out) {
    require_preset(o, "appendix-h", "stochastic");
    const ConfigDocument doc = load_spec(o);
    if (o.preset.empty() && !doc.link) {
        throw UsageError("experiment stochastic: give --preset appendix-h or a --spec with a link");
    }
    const LinkSpec link = doc.link ? *doc.link : LinkSpec::make(LinkFamily::exponential);
    if (!doc.experiment.alphas) {
        emit(appendix_h_table(link), o, out);
        return kExitOk;
    }
    CurveTable all;
    std::vector<StochasticConfig> panels = {stochastic_large_vs_many(), stochastic_symmetric(0.3),
                                            stochastic_symmetric(0.5)};
    for (std::size_t i = 0; i < panels.size(); ++i) {
        panels[i].link = link;
        panels[i].alphas = *doc.experiment.alphas;
        try {
            panels[i].validate();
        } catch (const InvalidSpec& e) {
            throw ConfigError(e.what());
        }
        CurveTable t = run_stochastic(panels[i]);
        CurveTable tagged;
        tagged.add_column("panel", std::vector<double>(t.rows(), double(i)));
        for (auto& [name, values] : t.columns) tagged.add_column(name, values);
        all.append_rows(tagged);
        all.metadata = t.metadata;
    }
    emit(all, o, out);
    return kExitOk;
}

inline int cmd_reweighting(const Options& o, std::ostream& out) {
    require_preset(o, "appendix-e1", "reweighting");
    const ConfigDocument doc = load_spec(o);
    if (o.preset.empty() && o.spec.empty()) {
        throw UsageError("experiment reweighting: give --preset appendix-e1 or a --spec");
    }
    ReweightOptions opt;
    if (doc.experiment.kappa) opt.kappa = *doc.experiment.kappa;
    if (doc.experiment.delta) opt.delta = *doc.experiment.delta;
    if (doc.link) opt.reference = *doc.link;
    const ScoreDomain domain = resolve_domain(o, doc, ScoreDomain(-5.0, 5.0, 401));
    emit(run_reweighting_demo(domain, observed_scores(doc), opt), o, out);
    return kExitOk;
}

inline int cmd_curves(const Options& o, std::ostream& out) {
    const ConfigDocument doc = load_spec(o);
    const ScoreDomain domain = resolve_domain(o, doc, ScoreDomain(-5.0, 5.0, 401));
    if (o.preset == "figure-2") {
        emit(emit_curves(figure2_specs(), domain, observed_scores(doc)), o, out);
    } else if (o.preset == "figure-3") {
        emit(emit_curves(figure3_specs(), domain, observed_scores(doc)), o, out);
    } else if (o.preset == "figure-4") {
        emit(figure4_table(domain), o, out);
    } else if (!o.preset.empty()) {
        throw UsageError("experiment curves: unknown preset '" + o.preset +
                         "' (expected figure-2, figure-3, figure-4)");
    } else if (doc.link) {
        emit(emit_curves({{"spec", *doc.link}}, domain, observed_scores(doc)), o, out);
    } else if (doc.transform) {
        emit(emit_curves({{"spec", *doc.transform}}, domain, observed_scores(doc)), o, out);
    } else {
        throw UsageError("experiment curves: give --preset or a --spec with a link or transform");
    }
    return kExitOk;
}

inline void add_output_flags(CLI::App* app, Options& o) {
    app->add_option("--output", o.output, "Output file (default: stdout)");
    app->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace cli

// Parses argv and dispatches; never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using cli::Options;
    Options o;
    CLI::App app{"Selective matching losses: evaluate, validate, design, reproduce experiments", "selective"};
    app.require_subcommand(1);

    auto* eval = app.add_subcommand("eval", "Evaluate link / loss / gradient at (s_hat, s) pairs or a batch CSV");
    eval->add_option("--spec", o.spec, "JSON configuration document")->required();
    eval->add_option("--pairs", o.pairs, "Pairs \"s_hat,s[;s_hat,s...]\"");
    eval->add_option("--batch", o.batch, "CSV with columns s_1..s_K, s_hat_1..s_hat_K");
    eval->add_option("--domain", o.domain, "\"min,max,points\"");
    cli::add_output_flags(eval, o);

    auto* validate = app.add_subcommand("validate", "Certify or refute a link / transform on a domain");
    validate->add_option("--spec", o.spec, "JSON configuration document")->required();
    validate->add_option("--domain", o.domain, "\"min,max,points\"");
    validate->add_option("--output", o.output, "Write the full JSON report here");

    auto* design = app.add_subcommand("design", "Look up the design table for a sensitivity profile");
    design->add_option("--profile", o.profile, "low_norm | high_norm | high_score | low_score")->required();
    design->add_option("--arity", o.arity, "scalar | multiclass");
    design->add_option("--output", o.output, "Output file (default: stdout)");

    auto* experiment = app.add_subcommand("experiment", "Run a reproduction experiment");
    experiment->require_subcommand(1);
    std::vector<CLI::App*> subs;
    const std::pair<const char*, const char*> names[] = {
        {"underspec", "Fit a two-feature linear model and report per-region error"},
        {"stochastic", "Minimizers of the expected loss over weighted score populations"},
        {"reweighting", "Compare reweighted square losses with a selective loss"},
        {"curves", "Tabulate links and losses over a score grid"},
    };
    for (auto [name, help] : names) {
        auto* sub = experiment->add_subcommand(name, help);
        sub->add_option("--preset", o.preset, "Embedded configuration");
        sub->add_option("--spec", o.spec, "JSON configuration document");
        sub->add_option("--domain", o.domain, "\"min,max,points\"");
        sub->add_option("--seed", o.seed, "Random seed");
        cli::add_output_flags(sub, o);
        subs.push_back(sub);
    }
    subs[0]->add_option("--link", o.link, "Run a single appendix-f configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        err << "run 'selective --help' for usage\n";
        return kExitUsage;
    }

    try {
        if (eval->parsed()) return cli::cmd_eval(o, out);
        if (validate->parsed()) return cli::cmd_validate(o, out, err);
        if (design->parsed()) return cli::cmd_design(o, out);
        if (subs[0]->parsed()) return cli::cmd_underspec(o, out);
        if (subs[1]->parsed()) return cli::cmd_stochastic(o, out);
        if (subs[2]->parsed()) return cli::cmd_reweighting(o, out);
        if (subs[3]->parsed()) return cli::cmd_curves(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidSpec& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    err << "error: no command\n";
    return kExitUsage;
}

}  // namespace selective
