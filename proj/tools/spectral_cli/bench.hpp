#pragma once

// Benchmark suites: every method is trained on the first 75% of a synthetic
// series and scored by cumulative RCE against the noiseless signal at the end
// of each quarter of the remaining horizon.

#include <filesystem>
#include <sstream>

#include "commands.hpp"

namespace spectral::cli {

inline constexpr double kTrainFraction = 0.75;
inline constexpr int kBenchQuantiles = 4;

struct MethodResult {
    std::string method;
    std::vector<double> rce;
    Json extra = Json::object();
};

struct TaskResult {
    std::string name;
    Index train = 0;
    Index total = 0;
    std::vector<MethodResult> methods;
    Json extra = Json::object();
};

namespace bench {

inline Index train_length(Index total) { return static_cast<Index>(std::floor(kTrainFraction * static_cast<double>(total))); }

inline std::vector<double> quantile_rce(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred, Index train) {
    const Index horizon = truth.cols() - train;
    std::vector<double> out;
    for (int q = 1; q <= kBenchQuantiles; ++q) out.push_back(rce(truth, pred, train + (horizon * q + kBenchQuantiles - 1) / kBenchQuantiles));
    return out;
}

inline std::vector<double> steps(Index total) {
    std::vector<double> s(static_cast<std::size_t>(total));
    for (Index k = 0; k < total; ++k) s[static_cast<std::size_t>(k)] = static_cast<double>(k);
    return s;
}

inline MethodResult fourier_method(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& truth, Index train, Index m,
                                   std::uint64_t seed, std::string name = "fourier") {
    FitConfig c;
    c.num_frequencies = m;
    c.seed = seed;
    const auto model = fit_fourier(TimeSeries(observed.leftCols(train)), c);
    const auto pred = predict_linear(model, steps(truth.cols()));
    MethodResult r{std::move(name), quantile_rce(truth, pred, train)};
    std::vector<double> periods;
    for (double w : model.omegas.values()) periods.push_back(kTwoPi / w);
    r.extra["periods"] = periods;
    return r;
}

inline KoopmanConfig bench_koopman_config(Index m, std::uint64_t seed) {
    KoopmanConfig k;
    k.fit.num_frequencies = m;
    k.fit.seed = seed;
    k.fit.max_sweeps = 5;
    k.restarts = 1;
    return k;
}

inline MethodResult koopman_method(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& truth, Index train, Index m,
                                   std::uint64_t seed) {
    const auto model = fit_koopman(TimeSeries(observed.leftCols(train)), bench_koopman_config(m, seed));
    const auto pred = predict_koopman(model, steps(truth.cols()));
    MethodResult r{"koopman", quantile_rce(truth, pred, train)};
    std::vector<double> periods;
    for (double w : model.omegas.values()) periods.push_back(kTwoPi / w);
    r.extra["periods"] = periods;
    return r;
}

inline Json eigen_json(const DMDModel& m) {
    Json arr = Json::array();
    for (Index k = 0; k < m.eigenvalues.size(); ++k)
        arr.push_back({{"re", m.eigenvalues(k).real()}, {"im", m.eigenvalues(k).imag()}, {"abs", std::abs(m.eigenvalues(k))}});
    return arr;
}

/// DMD on the training columns of z, forecast from the first snapshot, lifted by `lift`.
template <typename Lift>
MethodResult dmd_method(const Eigen::MatrixXd& z, const Eigen::MatrixXd& truth, Index train, bool forward_backward,
                        Lift&& lift) {
    const Eigen::MatrixXd zt = z.leftCols(train);
    const auto model = forward_backward ? fb_dmd_fit(zt) : dmd_fit(zt);
    const auto pred = lift(dmd_predict(model, steps(truth.cols())));
    MethodResult r{forward_backward ? "fb-dmd" : "dmd", quantile_rce(truth, pred, train)};
    r.extra["eigenvalues"] = eigen_json(model);
    if (model.fell_back_to_forward) r.extra["fell_back_to_forward"] = true;
    return r;
}

inline auto identity_lift() {
    return [](const Eigen::MatrixXd& m) { return m; };
}

inline TaskResult sin17_task(std::uint64_t seed) {
    const Index total = 4000;
    const Index train = train_length(total);
    const auto noisy = gen_nonlinear_sin17(total, 0.2, seed).series.values;
    const auto clean = gen_nonlinear_sin17(total, 0.0, seed).series.values;
    TaskResult t{"sin17", train, total};
    t.methods.push_back(fourier_method(noisy, clean, train, 8, seed, "fourier-8"));
    t.methods.push_back(koopman_method(noisy, clean, train, 1, seed));
    return t;
}

inline TaskResult square_task(std::uint64_t seed) {
    const Index total = 400;
    const Index train = train_length(total);
    const auto x = gen_square_wave(total).series.values;
    TaskResult t{"square_wave", train, total};
    t.methods.push_back(fourier_method(x, x, train, 1, seed, "fourier-1"));
    t.methods.push_back(koopman_method(x, x, train, 1, seed));
    return t;
}

/// Eight channels mixing three incommensurate oscillations, plus noise.
struct QuasiPeriodic {
    Eigen::MatrixXd clean;
    Eigen::MatrixXd noisy;
};

inline QuasiPeriodic quasi_periodic(Index total, double noise_sd, std::uint64_t seed) {
    const std::vector<double> omegas = {kTwoPi / 37.3, kTwoPi / 11.7, kTwoPi / 5.9};
    Rng rng(seed ^ 0xA5A5A5A5ULL);
    Eigen::MatrixXd mix(8, 7);
    for (Index r = 0; r < mix.rows(); ++r)
        for (Index c = 0; c < mix.cols(); ++c) mix(r, c) = rng.uniform(-1.0, 1.0);
    QuasiPeriodic q;
    q.clean = mix * detail::features_on_samples(omegas, total);
    q.noisy = q.clean;
    for (Index t = 0; t < total; ++t)
        for (Index l = 0; l < q.noisy.rows(); ++l) q.noisy(l, t) += noise_sd * rng.normal();
    return q;
}

inline TaskResult quasi_periodic_task(std::uint64_t seed) {
    const Index total = 2000;
    const Index train = train_length(total);
    const auto q = quasi_periodic(total, 0.1, seed);
    TaskResult t{"quasi_periodic", train, total};
    t.methods.push_back(fourier_method(q.noisy, q.clean, train, 3, seed, "fourier-3"));
    t.methods.push_back(dmd_method(q.noisy, q.clean, train, false, identity_lift()));
    t.methods.push_back(dmd_method(q.noisy, q.clean, train, true, identity_lift()));
    return t;
}

inline TaskResult rotation_task() {
    const Index total = 200;
    const Index train = train_length(total);
    const double theta = 0.3;
    Eigen::MatrixXd z(2, total);
    for (Index t = 0; t < total; ++t) {
        z(0, t) = std::cos(theta * static_cast<double>(t));
        z(1, t) = std::sin(theta * static_cast<double>(t));
    }
    TaskResult t{"rotation", train, total};
    t.methods.push_back(dmd_method(z, z, train, false, identity_lift()));
    t.methods.push_back(dmd_method(z, z, train, true, identity_lift()));
    return t;
}

inline const std::vector<Index>& pca_ranks() {
    static const std::vector<Index> ranks = {1, 2, 5, 10, 20, 30, 55};
    return ranks;
}

inline TaskResult traveling_wave_task(std::uint64_t seed) {
    const Index total = 2000;
    const Index train = train_length(total);
    const auto x = gen_traveling_wave(total).series.values;
    const Eigen::MatrixXd xt = x.leftCols(train);
    TaskResult t{"traveling_wave", train, total};
    Json sweep = Json::array();
    for (Index r : pca_ranks()) {
        const auto basis = pca_fit(xt, r);
        const double recon = pca_relative_error(basis, x);
        const Eigen::MatrixXd z = pca_project(basis, x);
        FitConfig c;
        c.num_frequencies = 10;
        c.seed = seed;
        const auto model = fit_fourier(TimeSeries(z.leftCols(train)), c);
        const auto pred = pca_reconstruct(basis, predict_linear(model, steps(total)));
        sweep.push_back({{"rank", r}, {"reconstruction_error", recon}, {"rce", quantile_rce(x, pred, train)}});
        if (r == 10) {
            auto lift = [&](const Eigen::MatrixXd& m) { return pca_reconstruct(basis, m); };
            MethodResult f{"pca10+fourier-10", quantile_rce(x, pred, train)};
            t.methods.push_back(std::move(f));
            t.methods.push_back(dmd_method(z, x, train, false, lift));
            t.methods.back().method = "pca10+dmd";
            t.methods.push_back(dmd_method(z, x, train, true, lift));
            t.methods.back().method = "pca10+fb-dmd";
        }
    }
    t.extra["pca_sweep"] = sweep;
    return t;
}

inline Json task_json(const TaskResult& t) {
    Json methods = Json::array();
    for (const auto& m : t.methods) {
        Json j{{"method", m.method}, {"rce", m.rce}};
        for (auto it = m.extra.begin(); it != m.extra.end(); ++it) j[it.key()] = it.value();
        methods.push_back(std::move(j));
    }
    Json j{{"name", t.name}, {"train", t.train}, {"total", t.total}, {"methods", methods}};
    for (auto it = t.extra.begin(); it != t.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

inline void print_task(std::ostream& os, const TaskResult& t) {
    os << "\n" << t.name << "  (train " << t.train << ", horizon " << (t.total - t.train) << ")\n";
    os << std::left << std::setw(20) << "method";
    for (int q = 1; q <= kBenchQuantiles; ++q) os << std::setw(14) << ("RCE q" + std::to_string(q));
    os << '\n';
    for (const auto& m : t.methods) {
        os << std::left << std::setw(20) << m.method;
        for (double v : m.rce) {
            std::ostringstream cell;
            cell << std::setprecision(4) << std::scientific << v;
            os << std::setw(14) << cell.str();
        }
        os << '\n';
    }
    if (t.extra.contains("pca_sweep")) {
        os << std::left << std::setw(8) << "rank" << std::setw(16) << "recon error" << "forecast RCE q4\n";
        for (const auto& row : t.extra["pca_sweep"]) {
            std::ostringstream a, b;
            a << std::setprecision(4) << std::scientific << row["reconstruction_error"].get<double>();
            b << std::setprecision(4) << std::scientific << row["rce"].back().get<double>();
            os << std::left << std::setw(8) << row["rank"].get<Index>() << std::setw(16) << a.str() << b.str() << '\n';
        }
    }
}

}  // namespace bench

/// Runs a suite and returns its JSON report.
inline Json run_bench_suite(const std::string& suite, std::uint64_t seed, std::ostream* table = nullptr) {
    std::vector<TaskResult> tasks;
    if (suite == "synthetic") {
        tasks.push_back(bench::sin17_task(seed));
        tasks.push_back(bench::square_task(seed));
        tasks.push_back(bench::quasi_periodic_task(seed));
    } else if (suite == "flows-synthetic") {
        tasks.push_back(bench::traveling_wave_task(seed));
        tasks.push_back(bench::rotation_task());
        tasks.push_back(bench::quasi_periodic_task(seed));
    } else {
        throw ConfigError("unknown suite '" + suite + "' (synthetic or flows-synthetic)");
    }
    Json report{{"suite", suite}, {"seed", seed}, {"train_fraction", kTrainFraction}, {"quantiles", kBenchQuantiles}};
    report["tasks"] = Json::array();
    for (const auto& t : tasks) {
        report["tasks"].push_back(bench::task_json(t));
        if (table) bench::print_task(*table, t);
    }
    return report;
}

inline int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
    log_config(err, "bench", o.to_json());
    if (o.out.empty()) throw ConfigError("--out is required");
    std::filesystem::create_directories(o.out);
    std::ostringstream table;
    const auto report = run_bench_suite(o.suite, o.seed, &table);
    write_json_file((std::filesystem::path(o.out) / "report.json").string(), report);
    write_text_file((std::filesystem::path(o.out) / "report.txt").string(), table.str());
    out << "suite: " << o.suite << table.str();
    return kOk;
}

}  // namespace spectral::cli
