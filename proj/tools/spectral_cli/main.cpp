#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using spectral::Json;

/// JSON config files. Top-level scalar keys belong to the active subcommand;
/// an object-valued key names the subcommand its members belong to.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::string default_section) : section_(std::move(default_section)) {}

    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        Json j = Json::object();
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames().front();
            if (opt->count() > 0) {
                const auto& res = opt->results();
                j[name] = res.size() == 1 ? Json(res.front()) : Json(res);
            } else if (default_also && !opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            auto child = Json::parse(to_config(sub, default_also, false, ""));
            if (!child.empty()) j[sub->get_name()] = child;
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        Json j;
        try {
            j = Json::parse(input);
        } catch (const Json::exception& e) {
            throw CLI::ConversionError(std::string("config file: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_object()) {
                for (auto sub = it.value().begin(); sub != it.value().end(); ++sub)
                    items.push_back(item({it.key()}, sub.key(), sub.value()));
            } else {
                std::vector<std::string> parents;
                if (!section_.empty()) parents.push_back(section_);
                items.push_back(item(std::move(parents), it.key(), it.value()));
            }
        }
        return items;
    }

private:
    static std::string scalar(const Json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static CLI::ConfigItem item(std::vector<std::string> parents, std::string name, const Json& v) {
        CLI::ConfigItem c;
        c.parents = std::move(parents);
        c.name = std::move(name);
        if (v.is_array()) {
            for (const auto& e : v) c.inputs.push_back(scalar(e));
        } else {
            c.inputs.push_back(scalar(v));
        }
        return c;
    }

    std::string section_;
};

std::vector<spectral::Index> parse_hidden(const std::string& text) {
    std::vector<spectral::Index> widths;
    if (text.empty() || text == "none") return widths;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        std::size_t used = 0;
        long long w = 0;
        try {
            w = std::stoll(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size() || w < 1) throw spectral::ConfigError("--hidden expects comma-separated positive widths");
        widths.push_back(static_cast<spectral::Index>(w));
    }
    return widths;
}

void add_fit_flags(CLI::App* cmd, spectral::cli::FitOptions& o, std::string& hidden) {
    cmd->add_option("--algo", o.algo, "fourier, koopman or fourier-pc")->capture_default_str();
    cmd->add_option("--data", o.data, "input CSV")->required();
    cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    cmd->add_option("--max-sweeps", o.max_sweeps)->capture_default_str();
    cmd->add_option("--gd-steps", o.gd_steps)->capture_default_str();
    cmd->add_option("--gd-rate", o.gd_rate)->capture_default_str();
    cmd->add_option("--gd-tolerance", o.gd_tolerance)->capture_default_str();
    cmd->add_option("--convergence-tolerance", o.convergence_tolerance)->capture_default_str();
    cmd->add_option("--hidden", hidden, "decoder hidden widths, e.g. 32,32 (none for affine)")->capture_default_str();
    cmd->add_option("--activation", o.activation, "tanh, relu or identity")->capture_default_str();
    cmd->add_option("--inner-iters", o.inner_iters, "decoder training iterations per sweep")->capture_default_str();
    cmd->add_option("--restarts", o.restarts)->capture_default_str();
    cmd->add_option("--samples-per-period", o.samples_per_period, "phase samples N per local loss")->capture_default_str();
    cmd->add_option("--learning-rate", o.learning_rate)->capture_default_str();
    cmd->add_option("--phase-candidates", o.phase_candidates)->capture_default_str();
    cmd->add_option("--tv-weight", o.tv_weight, "phase TV penalty (inf pins the phase)")->capture_default_str();
    cmd->add_option("--train-fraction", o.train_fraction, "leading fraction of rows to fit")->capture_default_str();
}

/// First subcommand name on the command line, used as the section for flat config keys.
std::string active_subcommand(int argc, char** argv, const std::vector<std::string>& names) {
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        for (const auto& n : names)
            if (a == n) return n;
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = spectral::cli;
    CLI::App app{"Spectral forecasting of quasi-periodic time series", "spectral_forecast"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "JSON config file with the same keys as the flags");
    const std::vector<std::string> names = {"synth", "fit", "predict", "eval", "surface", "bench"};
    app.config_formatter(std::make_shared<JsonConfig>(active_subcommand(argc, argv, names)));

    cli::SynthOptions synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic dataset");
    s->add_option("kind", synth.kind, "mix, sin17, square, wave or multiscale")->required();
    s->add_option("--T", synth.T, "number of samples")->capture_default_str();
    s->add_option("--noise-var", synth.noise_var)->capture_default_str();
    s->add_option("--seed", synth.seed)->capture_default_str();
    s->add_option("--out", synth.out, "output CSV")->required();
    s->add_option("--U", synth.U, "spatial points of the traveling wave")->capture_default_str();
    s->add_option("--freqs", synth.freqs, "angular frequencies (mix)")->delimiter(',');
    s->add_option("--amps", synth.amps, "amplitudes (mix)")->delimiter(',');
    s->add_option("--phases", synth.phases, "phases (mix)")->delimiter(',');
    s->add_option("--daily", synth.daily)->capture_default_str();
    s->add_option("--weekly", synth.weekly)->capture_default_str();
    s->add_option("--seasonal", synth.seasonal)->capture_default_str();

    cli::FitOptions fit;
    std::string fit_hidden = "32,32";
    auto* f = app.add_subcommand("fit", "fit a model to a dataset");
    add_fit_flags(f, fit, fit_hidden);
    f->add_option("--freqs", fit.freqs, "number of frequencies m")->capture_default_str();
    f->add_option("--model", fit.model, "output model JSON")->required();

    cli::PredictOptions predict;
    auto* p = app.add_subcommand("predict", "evaluate a fitted model at arbitrary times");
    p->add_option("--model", predict.model)->required();
    p->add_option("--from", predict.from)->required();
    p->add_option("--to", predict.to)->required();
    p->add_option("--step", predict.step)->capture_default_str();
    p->add_option("--out", predict.out)->required();

    cli::EvalOptions eval;
    double split = 0.0;
    auto* e = app.add_subcommand("eval", "cumulative RCE at horizon quantiles");
    e->add_option("--truth", eval.truth)->required();
    e->add_option("--pred", eval.pred)->required();
    e->add_option("--quantiles", eval.quantiles)->capture_default_str();
    auto* split_opt = e->add_option("--split", split, "first forecast time; earlier rows only enter the sums");
    e->add_option("--json", eval.json, "write the report here instead of stdout");

    cli::SurfaceOptions surface;
    std::string surface_hidden = "32,32";
    auto* u = app.add_subcommand("surface", "export the error surface of one frequency");
    add_fit_flags(u, surface.fit, surface_hidden);
    u->add_option("--freq-index", surface.freq_index)->capture_default_str();
    u->add_option("--out", surface.out)->required();

    cli::BenchOptions bench;
    auto* b = app.add_subcommand("bench", "run a benchmark suite");
    b->add_option("--suite", bench.suite, "synthetic or flows-synthetic")->capture_default_str();
    b->add_option("--out", bench.out, "report directory")->required();
    b->add_option("--seed", bench.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? cli::kOk : cli::kUsage;
    }

    try {
        if (s->parsed()) return cli::cmd_synth(synth, std::cout, std::cerr);
        if (f->parsed()) {
            fit.hidden = parse_hidden(fit_hidden);
            return cli::cmd_fit(fit, std::cout, std::cerr);
        }
        if (p->parsed()) return cli::cmd_predict(predict, std::cout, std::cerr);
        if (e->parsed()) {
            if (split_opt->count() > 0) eval.split = split;
            return cli::cmd_eval(eval, std::cout, std::cerr);
        }
        if (u->parsed()) {
            surface.fit.hidden = parse_hidden(surface_hidden);
            return cli::cmd_surface(surface, std::cout, std::cerr);
        }
        if (b->parsed()) return cli::cmd_bench(bench, std::cout, std::cerr);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return cli::exit_code_for(ex);
    }
    return cli::kUsage;
}
