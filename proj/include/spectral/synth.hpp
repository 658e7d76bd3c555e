#pragma once

// Synthetic ground-truth signals and the relative cumulative error metric.
//
// Noise is sqrt(noise_var) * Rng(seed).normal(), drawn in time order and then
// row order, so a seed fixes every generated value.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/random.hpp"

namespace spectral {

/// Injected components of a generated signal, for recovery scoring.
struct GroundTruth {
    std::string kind;
    std::vector<double> omegas;
    std::vector<double> amplitudes;
    std::vector<double> phases;
    double noise_var = 0.0;
    std::uint64_t seed = 0;
};

struct Generated {
    TimeSeries series;
    GroundTruth truth;
};

namespace detail {

inline void add_noise(Eigen::MatrixXd& x, double noise_var, std::uint64_t seed) {
    if (noise_var < 0.0) throw ConfigError("noise variance must be non-negative");
    if (noise_var == 0.0) return;
    Rng rng(seed);
    const double sd = std::sqrt(noise_var);
    for (Index t = 0; t < x.cols(); ++t)
        for (Index l = 0; l < x.rows(); ++l) x(l, t) += sd * rng.normal();
}

}  // namespace detail

/// x_t = sum_k a_k cos(w_k t + phi_k) + noise.
[[nodiscard]] inline Generated gen_sinusoid_mix(std::span<const double> freqs, std::span<const double> amps,
                                                std::span<const double> phases, Index T, double noise_var,
                                                std::uint64_t seed) {
    if (freqs.size() != amps.size() || freqs.size() != phases.size())
        throw ConfigError("frequency, amplitude and phase lists differ in length");
    if (T < 2) throw SizeError("T must be >= 2");
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, T);
    for (Index t = 0; t < T; ++t) {
        double v = 0.0;
        for (std::size_t k = 0; k < freqs.size(); ++k) v += amps[k] * std::cos(freqs[k] * static_cast<double>(t) + phases[k]);
        x(0, t) = v;
    }
    detail::add_noise(x, noise_var, seed);
    GroundTruth g{"sinusoid_mix", {}, {}, {}, noise_var, seed};
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        if (amps[k] == 0.0) continue;
        g.omegas.push_back(freqs[k]);
        g.amplitudes.push_back(amps[k]);
        g.phases.push_back(phases[k]);
    }
    return {TimeSeries(std::move(x)), std::move(g)};
}

/// sin(2 pi t / 24)^17 without noise.
[[nodiscard]] inline double sin17_value(double t) { return std::pow(std::sin(kTwoPi / 24.0 * t), 17); }

/// Amplitude of the 24-sample fundamental of sin^17: C(17, 8) / 2^16.
inline constexpr double kSin17Fundamental = 24310.0 / 65536.0;

[[nodiscard]] inline Generated gen_nonlinear_sin17(Index T, double noise_var, std::uint64_t seed) {
    if (T < 48) throw SizeError("sin17 generator needs T >= 48");
    Eigen::MatrixXd x(1, T);
    for (Index t = 0; t < T; ++t) x(0, t) = sin17_value(static_cast<double>(t));
    detail::add_noise(x, noise_var, seed);
    return {TimeSeries(std::move(x)), GroundTruth{"nonlinear_sin17", {kTwoPi / 24.0}, {kSin17Fundamental}, {-kPi / 2.0}, noise_var, seed}};
}

/// 1 for t % 4 in {0, 1}, else 0.
[[nodiscard]] inline double square_wave_value(long long t) {
    const long long r = ((t % 4) + 4) % 4;
    return r <= 1 ? 1.0 : 0.0;
}

/// Phase with square_wave(t) == [cos(pi t / 2 + phase) > 0].
inline constexpr double kSquareWavePhase = -kPi / 4.0;

[[nodiscard]] inline Generated gen_square_wave(Index T) {
    if (T < 4) throw SizeError("square wave needs T >= 4");
    Eigen::MatrixXd x(1, T);
    for (Index t = 0; t < T; ++t) x(0, t) = square_wave_value(t);
    return {TimeSeries(std::move(x)), GroundTruth{"square_wave", {kPi / 2.0}, {1.0}, {kSquareWavePhase}, 0.0, 0}};
}

/// Mean of the traveling bump at time t.
[[nodiscard]] inline double traveling_wave_mean(double t) { return (std::sin(0.01 * t) + 1.0) * 100.0 + 28.0; }

inline constexpr double kTravelingWaveVar = 10.0;

/// U x T matrix of Gaussian densities N(u | mean(t), 10) at u = 1..U.
[[nodiscard]] inline Generated gen_traveling_wave(Index T, Index U = 256) {
    if (T < 100) throw SizeError("traveling wave needs T >= 100");
    if (U < 1) throw SizeError("U must be >= 1");
    Eigen::MatrixXd x(U, T);
    const double norm = 1.0 / std::sqrt(kTwoPi * kTravelingWaveVar);
    for (Index t = 0; t < T; ++t) {
        const double mu = traveling_wave_mean(static_cast<double>(t));
        for (Index u = 1; u <= U; ++u) {
            const double d = static_cast<double>(u) - mu;
            x(u - 1, t) = norm * std::exp(-d * d / (2.0 * kTravelingWaveVar));
        }
    }
    return {TimeSeries(std::move(x)), GroundTruth{"traveling_wave", {0.01}, {100.0}, {0.0}, 0.0, 0}};
}

/// Daily, weekly and seasonal cycles (periods 24, 168, 8760) plus a period-84
/// weekday/weekend harmonic whose amplitude is weekday_ratio * weekly.
struct MultiscaleParams {
    double daily = 1.0;
    double weekly = 0.5;
    double seasonal = 0.8;
    double weekday_ratio = 0.5;
};

[[nodiscard]] inline Generated gen_multiscale(Index T, double noise_var, std::uint64_t seed,
                                              const MultiscaleParams& p = {}) {
    const std::vector<double> omegas = {kTwoPi / 24.0, kTwoPi / 168.0, kTwoPi / 84.0, kTwoPi / 8760.0};
    const std::vector<double> amps = {p.daily, p.weekly, p.weekly * p.weekday_ratio, p.seasonal};
    const std::vector<double> phases = {0.3, 1.1, -0.7, 2.0};
    auto g = gen_sinusoid_mix(omegas, amps, phases, T, noise_var, seed);
    g.truth.kind = "multiscale";
    return g;
}

/// sum (truth - pred)^2 / sum truth^2 over the first `columns` columns.
[[nodiscard]] inline double rce(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred, Index columns) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) throw DimensionError("truth and prediction shapes differ");
    if (columns < 1 || columns > truth.cols()) throw DimensionError("RCE range out of bounds");
    const double denom = truth.leftCols(columns).squaredNorm();
    if (!(denom > 0.0)) throw DegenerateInputError("truth has zero energy");
    return (truth.leftCols(columns) - pred.leftCols(columns)).squaredNorm() / denom;
}

[[nodiscard]] inline double rce(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
    return rce(truth, pred, truth.cols());
}

}  // namespace spectral
