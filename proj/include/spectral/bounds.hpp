#pragma once

// Frequency uncertainty, linear-in-time forecast bounds and the single-tone
// frequency posterior.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spectral/decoder.hpp"
#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/spectral_core.hpp"

namespace spectral {

struct FrequencyUncertainty {
    std::vector<double> stddev;
    std::vector<double> amplitudes;
    double noise_var = 0.0;
    Index T = 0;
};

struct PredictionBound {
    double lipschitz = 0.0;
    double horizon = 0.0;
    double value = 0.0;
};

/// (noise_var / A) sqrt(48 / T^3).
[[nodiscard]] inline double jaynes_std(double amplitude, double noise_var, Index T) {
    if (!(amplitude > 0.0)) throw ConfigError("amplitude must be positive");
    if (noise_var < 0.0) throw ConfigError("noise variance must be non-negative");
    if (T < 2) throw SizeError("T must be >= 2");
    const double t = static_cast<double>(T);
    return noise_var / amplitude * std::sqrt(48.0 / (t * t * t));
}

/// Same law with the noise standard deviation in place of the variance.
[[nodiscard]] inline double jaynes_std_sd(double amplitude, double noise_sd, Index T) {
    return jaynes_std(amplitude, noise_sd, T);
}

[[nodiscard]] inline FrequencyUncertainty frequency_uncertainty(std::span<const double> amplitudes, double noise_var,
                                                                Index T) {
    FrequencyUncertainty u;
    u.amplitudes.assign(amplitudes.begin(), amplitudes.end());
    u.noise_var = noise_var;
    u.T = T;
    for (double a : amplitudes) u.stddev.push_back(jaynes_std(a, noise_var, T));
    return u;
}

/// lipschitz * horizon * sum_i |dw_i|.
[[nodiscard]] inline double prediction_error_bound(double lipschitz, double horizon, std::span<const double> freq_errors) {
    if (lipschitz < 0.0 || horizon < 0.0) throw ConfigError("lipschitz and horizon must be non-negative");
    double sum = 0.0;
    for (double e : freq_errors) sum += std::abs(e);
    return lipschitz * horizon * sum;
}

/// Bound with the frequency errors replaced by their Jaynes standard deviations.
[[nodiscard]] inline PredictionBound prediction_bound_from_noise(double lipschitz, double horizon,
                                                                 std::span<const double> amplitudes, double noise_var,
                                                                 Index T) {
    const auto u = frequency_uncertainty(amplitudes, noise_var, T);
    return {lipschitz, horizon, prediction_error_bound(lipschitz, horizon, u.stddev)};
}

/// Product of layer spectral norms; tanh, relu and identity all have slope <= 1.
[[nodiscard]] inline double decoder_lipschitz_upper(const DecoderParams& params) {
    params.validate();
    double l = 1.0;
    for (const auto& layer : params.layers) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(layer.weight);
        l *= svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    return l;
}

/// Lipschitz constant of the map from oscillator features to observations for a linear model.
[[nodiscard]] inline double amplitude_lipschitz(const Eigen::MatrixXd& amplitudes) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(amplitudes);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Log arguments this close to zero are rounding error on a noiseless tone.
inline constexpr double kPosteriorSaturation = 1e-12;

struct PosteriorPoint {
    double omega = 0.0;
    double log_posterior = 0.0;
};

struct FrequencyPosterior {
    std::vector<PosteriorPoint> points;
    /// Standardization applied before evaluation: (x - mean) / scale.
    double mean = 0.0;
    double scale = 1.0;
};

/// Log of [1 - 2 |x^(w_b)|^2 / T]^{1 - T/2} on bins 0 < b < T/2 after
/// standardizing x, with x^ the DFT divided by sqrt(T). Shifted so the
/// maximum is 0. When some bins have a log argument at or below
/// kPosteriorSaturation the posterior has saturated: those bins become 0 and
/// all others -inf.
[[nodiscard]] inline FrequencyPosterior frequency_posterior(std::span<const double> x) {
    const Index T = static_cast<Index>(x.size());
    if (T < 8) throw SizeError("frequency posterior needs T >= 8");
    FrequencyPosterior post;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(T);
    if (!(var > 0.0) || !std::isfinite(var)) throw DegenerateInputError("constant signal has no frequency posterior");
    post.mean = mean;
    post.scale = std::sqrt(var);
    std::vector<double> z(x.begin(), x.end());
    for (double& v : z) v = (v - mean) / post.scale;
    const auto spec = detail::fft_real_full(z);
    const Index bins = surface_bin_count(T);
    const double exponent = 1.0 - static_cast<double>(T) / 2.0;
    std::vector<double> arg(static_cast<std::size_t>(bins));
    bool saturated = false;
    for (Index b = 1; b <= bins; ++b) {
        const double power = std::norm(spec[static_cast<std::size_t>(b)]) / static_cast<double>(T);
        arg[static_cast<std::size_t>(b - 1)] = 1.0 - 2.0 * power / static_cast<double>(T);
        if (arg[static_cast<std::size_t>(b - 1)] <= kPosteriorSaturation) saturated = true;
    }
    double best = -std::numeric_limits<double>::infinity();
    post.points.resize(static_cast<std::size_t>(bins));
    for (Index b = 1; b <= bins; ++b) {
        const auto k = static_cast<std::size_t>(b - 1);
        double lp;
        if (saturated) lp = arg[k] <= kPosteriorSaturation ? 0.0 : -std::numeric_limits<double>::infinity();
        else lp = exponent * std::log(arg[k]);
        post.points[k] = {kTwoPi * static_cast<double>(b) / static_cast<double>(T), lp};
        best = std::max(best, lp);
    }
    if (!saturated)
        for (auto& p : post.points) p.log_posterior -= best;
    return post;
}

}  // namespace spectral
