#pragma once

// Command implementations behind the spectral_forecast executable.
// Each command reads its options struct, writes results to `out` and
// diagnostics to `err`, and returns a process exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectral/spectral.hpp"

namespace spectral::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDataError = 3, kNumericalError = 4 };

/// Exit code for an exception escaping a command.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return kDataError;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidFrequencyError*>(&e)) return kUsage;
    if (dynamic_cast<const Error*>(&e)) return kNumericalError;
    return kFailure;
}

struct SynthOptions {
    std::string kind;
    Index T = 1000;
    double noise_var = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    Index U = 256;
    std::vector<double> freqs;
    std::vector<double> amps;
    std::vector<double> phases;
    double daily = 1.0;
    double weekly = 0.5;
    double seasonal = 0.8;

    [[nodiscard]] Json to_json() const {
        return {{"kind", kind}, {"T", T},         {"noise-var", noise_var}, {"seed", seed},
                {"out", out},   {"U", U},         {"freqs", freqs},         {"amps", amps},
                {"phases", phases}, {"daily", daily}, {"weekly", weekly},     {"seasonal", seasonal}};
    }
};

struct FitOptions {
    std::string algo = "fourier";
    std::string data;
    Index freqs = 1;
    std::string model;
    std::uint64_t seed = 0;
    int max_sweeps = 10;
    int gd_steps = 50;
    double gd_rate = 1.0;
    double gd_tolerance = 1e-13;
    double convergence_tolerance = 1e-8;
    std::vector<Index> hidden = {32, 32};
    std::string activation = "tanh";
    int inner_iters = 200;
    int restarts = 3;
    Index samples_per_period = 64;
    double learning_rate = 1e-2;
    int phase_candidates = 4;
    double tv_weight = 1.0;
    /// Leading fraction of the rows used for fitting.
    double train_fraction = 1.0;

    [[nodiscard]] FitConfig fit_config() const {
        FitConfig c;
        c.num_frequencies = freqs;
        c.max_sweeps = max_sweeps;
        c.gd_steps = gd_steps;
        c.gd_rate = gd_rate;
        c.gd_tolerance = gd_tolerance;
        c.convergence_tolerance = convergence_tolerance;
        c.seed = seed;
        return c;
    }

    [[nodiscard]] KoopmanConfig koopman_config() const {
        KoopmanConfig k;
        k.fit = fit_config();
        k.hidden = hidden;
        k.activation = activation_from_string(activation);
        k.inner_gd_iters = inner_iters;
        k.restarts = restarts;
        k.samples_per_period = samples_per_period;
        k.learning_rate = learning_rate;
        k.phase_candidates = phase_candidates;
        return k;
    }

    [[nodiscard]] Json to_json() const {
        Json j{{"algo", algo},
               {"data", data},
               {"freqs", freqs},
               {"model", model},
               {"seed", seed},
               {"max-sweeps", max_sweeps},
               {"gd-steps", gd_steps},
               {"gd-rate", gd_rate},
               {"gd-tolerance", gd_tolerance},
               {"convergence-tolerance", convergence_tolerance},
               {"train-fraction", train_fraction}};
        if (algo == "koopman") {
            j["hidden"] = hidden;
            j["activation"] = activation;
            j["inner-iters"] = inner_iters;
            j["restarts"] = restarts;
            j["samples-per-period"] = samples_per_period;
            j["learning-rate"] = learning_rate;
            j["phase-candidates"] = phase_candidates;
        }
        if (algo == "fourier-pc") j["tv-weight"] = std::isinf(tv_weight) ? Json("inf") : Json(tv_weight);
        return j;
    }
};

struct PredictOptions {
    std::string model;
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;
    std::string out;

    [[nodiscard]] Json to_json() const {
        return {{"model", model}, {"from", from}, {"to", to}, {"step", step}, {"out", out}};
    }
};

struct EvalOptions {
    std::string truth;
    std::string pred;
    int quantiles = 4;
    /// Rows with t < split count toward the sums but not toward the horizon.
    std::optional<double> split;
    std::string json;

    [[nodiscard]] Json to_json() const {
        Json j{{"truth", truth}, {"pred", pred}, {"quantiles", quantiles}, {"json", json}};
        j["split"] = split ? Json(*split) : Json(nullptr);
        return j;
    }
};

struct SurfaceOptions {
    FitOptions fit;
    Index freq_index = 0;
    std::string out;

    [[nodiscard]] Json to_json() const {
        Json j = fit.to_json();
        j.erase("model");
        j.erase("freqs");
        j["freq-index"] = freq_index;
        j["out"] = out;
        return j;
    }
};

struct BenchOptions {
    std::string suite = "synthetic";
    std::string out;
    std::uint64_t seed = 0;

    [[nodiscard]] Json to_json() const { return {{"suite", suite}, {"out", out}, {"seed", seed}}; }
};

inline void log_config(std::ostream& err, std::string_view command, const Json& cfg) {
    err << command << " config: " << cfg.dump() << '\n';
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
}

inline std::vector<double> periods_of(const FrequencyVector& omegas, double dt) {
    std::vector<double> p;
    for (double w : omegas.values()) p.push_back(kTwoPi / w * dt);
    return p;
}

// synth

inline Generated generate(const SynthOptions& o) {
    const std::string& k = o.kind;
    if (k == "mix" || k == "sinusoid_mix") {
        if (o.freqs.empty()) throw ConfigError("mix needs --freqs");
        auto amps = o.amps.empty() ? std::vector<double>(o.freqs.size(), 1.0) : o.amps;
        auto phases = o.phases.empty() ? std::vector<double>(o.freqs.size(), 0.0) : o.phases;
        return gen_sinusoid_mix(o.freqs, amps, phases, o.T, o.noise_var, o.seed);
    }
    if (k == "sin17" || k == "nonlinear_sin17") return gen_nonlinear_sin17(o.T, o.noise_var, o.seed);
    if (k == "square" || k == "square_wave") return gen_square_wave(o.T);
    if (k == "wave" || k == "traveling_wave") return gen_traveling_wave(o.T, o.U);
    if (k == "multiscale") return gen_multiscale(o.T, o.noise_var, o.seed, MultiscaleParams{o.daily, o.weekly, o.seasonal, 0.5});
    throw ConfigError("unknown synth kind '" + k + "'");
}

inline Json truth_to_json(const GroundTruth& g, Index T, Index n) {
    std::vector<double> periods;
    for (double w : g.omegas) periods.push_back(kTwoPi / w);
    return {{"kind", g.kind},   {"omegas", g.omegas}, {"periods", periods}, {"amplitudes", g.amplitudes},
            {"phases", g.phases}, {"noise_var", g.noise_var}, {"seed", g.seed}, {"T", T}, {"n", n}};
}

inline int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "synth", o.to_json());
    if (o.out.empty()) throw ConfigError("--out is required");
    Generated g;
    try {
        g = generate(o);
    } catch (const SizeError& e) {
        throw ConfigError(e.what());
    }
    write_csv_file(o.out, g.series);
    write_json_file(o.out + ".meta.json", truth_to_json(g.truth, g.series.length(), g.series.dims()));
    out << "wrote " << g.series.length() << " rows x " << g.series.dims() << " channels to " << o.out << '\n';
    return kOk;
}

// fit

inline TimeSeries leading_fraction(const TimeSeries& s, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("train fraction must be in (0, 1]");
    const auto T = std::max<Index>(2, static_cast<Index>(std::floor(fraction * static_cast<double>(s.length()))));
    return TimeSeries(s.values.leftCols(T), TimeGrid{s.grid.t0, s.grid.dt, T});
}

inline int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "fit", o.to_json());
    if (o.model.empty()) throw ConfigError("--model is required");
    const auto full = read_csv_file(o.data);
    const auto data = leading_fraction(full, o.train_fraction);
    const auto start = std::chrono::steady_clock::now();
    Json model;
    FrequencyVector omegas;
    double loss = 0.0;
    if (o.algo == "fourier") {
        const auto m = fit_fourier(data, o.fit_config());
        model = model_to_json(m);
        omegas = m.omegas;
        loss = m.training_loss;
    } else if (o.algo == "koopman") {
        const auto m = fit_koopman(data, o.koopman_config());
        model = model_to_json(m);
        omegas = m.omegas;
        loss = m.training_loss;
    } else if (o.algo == "fourier-pc") {
        const auto r = fit_fourier_pc(data, o.fit_config(), o.tv_weight);
        model = model_to_json(r.model, r.track);
        model["tv_norm"] = r.track.tv_norm();
        omegas = r.model.omegas;
        loss = r.model.training_loss;
    } else {
        throw ConfigError("unknown algorithm '" + o.algo + "'");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json_file(o.model, model);
    out << "algo: " << o.algo << '\n';
    out << "training_loss: " << format_double(loss) << '\n';
    const auto periods = periods_of(omegas, data.grid.dt);
    for (Index i = 0; i < omegas.size(); ++i)
        out << "omega[" << i << "]: " << format_double(omegas[i]) << "  period: " << format_double(periods[static_cast<std::size_t>(i)]) << '\n';
    out << "wall_time_s: " << std::fixed << std::setprecision(3) << seconds << std::defaultfloat << '\n';
    return kOk;
}

// predict

inline std::vector<double> time_range(double from, double to, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("--step must be positive");
    if (!(to >= from)) throw ConfigError("--to must not precede --from");
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step * (1.0 + 1e-12))) + 1;
    std::vector<double> times(count);
    for (std::size_t k = 0; k < count; ++k) times[k] = from + static_cast<double>(k) * step;
    return times;
}

inline int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "predict", o.to_json());
    if (o.out.empty()) throw ConfigError("--out is required");
    const auto model = read_model_file(o.model);
    const auto times = time_range(o.from, o.to, o.step);
    const auto pred = model.predict(times);
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + o.out + "' for writing");
    write_csv(f, pred, times);
    out << "wrote " << times.size() << " predictions to " << o.out << '\n';
    return kOk;
}

// eval

struct EvalReport {
    std::vector<double> horizon_end;  // t of the last row in each quantile
    std::vector<double> rce;
};

/// Cumulative RCE at the end of each horizon quantile; rows are matched by time.
inline EvalReport evaluate(const CsvTable& truth, const CsvTable& pred, int quantiles, std::optional<double> split) {
    if (quantiles < 1) throw ConfigError("--quantiles must be >= 1");
    if (truth.values.rows() != pred.values.rows()) throw ParseError("truth and prediction have different channel counts");
    if (pred.times.empty()) throw ParseError("prediction file has no rows");
    const double scale = truth.times.size() > 1 ? std::abs(truth.times[1] - truth.times[0]) : 1.0;
    std::vector<Index> match;
    std::size_t j = 0;
    for (std::size_t k = 0; k < pred.times.size(); ++k) {
        const double t = pred.times[k];
        while (j < truth.times.size() && truth.times[j] < t - 1e-9 * scale) ++j;
        if (j == truth.times.size() || std::abs(truth.times[j] - t) > 1e-9 * scale)
            throw ParseError("prediction time " + format_double(t) + " has no matching truth row");
        match.push_back(static_cast<Index>(j));
    }
    const Index H = static_cast<Index>(match.size());
    Eigen::MatrixXd tv(truth.values.rows(), H);
    for (Index k = 0; k < H; ++k) tv.col(k) = truth.values.col(match[static_cast<std::size_t>(k)]);
    Index first = 0;
    if (split) {
        while (first < H && pred.times[static_cast<std::size_t>(first)] < *split) ++first;
        if (first == H) throw ConfigError("--split leaves no horizon rows");
    }
    const Index horizon = H - first;
    EvalReport r;
    for (int q = 1; q <= quantiles; ++q) {
        const Index end = first + std::max<Index>(1, (horizon * q + quantiles - 1) / quantiles);
        r.horizon_end.push_back(pred.times[static_cast<std::size_t>(end - 1)]);
        r.rce.push_back(rce(tv, pred.values, end));
    }
    return r;
}

inline int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "eval", o.to_json());
    const auto truth = read_csv_table_file(o.truth);
    const auto pred = read_csv_table_file(o.pred);
    const auto r = evaluate(truth, pred, o.quantiles, o.split);
    out << std::left << std::setw(10) << "quantile" << std::setw(16) << "t_end" << "rce\n";
    for (std::size_t q = 0; q < r.rce.size(); ++q)
        out << std::left << std::setw(10) << (q + 1) << std::setw(16) << format_double(r.horizon_end[q])
            << format_double(r.rce[q]) << '\n';
    Json j{{"quantiles", o.quantiles}, {"t_end", r.horizon_end}, {"rce", r.rce}};
    if (!o.json.empty()) write_json_file(o.json, j);
    else out << j.dump() << '\n';
    return kOk;
}

// surface

/// Surface seen when extracting frequency `freq_index`: the first freq_index
/// frequencies are fitted and removed (linear), or the curve of that index in
/// a fitted Koopman model.
inline ErrorSurface compute_surface(const TimeSeries& data, const SurfaceOptions& o) {
    if (o.freq_index < 0) throw ConfigError("--freq-index must be >= 0");
    if (o.fit.algo == "fourier") {
        if (o.freq_index == 0) return error_surface_linear(data.values);
        FitOptions f = o.fit;
        f.freqs = o.freq_index;
        const auto m = fit_fourier(data, f.fit_config());
        return error_surface_linear(residual(data.values, m.amplitudes, m.omegas.values(), std::nullopt));
    }
    if (o.fit.algo == "koopman") {
        FitOptions f = o.fit;
        f.freqs = o.freq_index + 1;
        const auto m = fit_koopman(data, f.koopman_config());
        auto curves = koopman_loss_curves(data.values, m.omegas.values(), m.decoder, o.freq_index, f.samples_per_period, 1);
        return std::move(curves.front().surface);
    }
    throw ConfigError("surface supports --algo fourier or koopman");
}

inline int cmd_surface(const SurfaceOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "surface", o.to_json());
    if (o.out.empty()) throw ConfigError("--out is required");
    const auto data = read_csv_file(o.fit.data);
    const auto s = compute_surface(data, o);
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + o.out + "' for writing");
    f << "omega,loss\n";
    for (std::size_t k = 0; k < s.size(); ++k) f << format_double(s.grid_omegas[k]) << ',' << format_double(s.losses[k]) << '\n';
    const auto best = argmin_surface(s);
    out << "points: " << s.size() << '\n';
    out << "argmin_omega: " << format_double(best.omega) << "  period: " << format_double(kTwoPi / best.omega * data.grid.dt)
        << "  loss: " << format_double(best.loss) << '\n';
    return kOk;
}

}  // namespace spectral::cli

#include "bench.hpp"
