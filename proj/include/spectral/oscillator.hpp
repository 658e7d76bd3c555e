#pragma once

// Oscillator feature basis: the constant row followed by cos(w_i t) and sin(w_i t).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"

namespace spectral {

using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Angular frequencies in radians per sample step.
///
/// Every entry lies in (0, pi] and no two entries coincide within 1e-12.
class FrequencyVector {
public:
    static constexpr double kDuplicateTolerance = 1e-12;

    FrequencyVector() = default;

    explicit FrequencyVector(std::vector<double> omegas) : omegas_(std::move(omegas)) {
        validate(omegas_);
    }

    FrequencyVector(std::initializer_list<double> omegas) : FrequencyVector(std::vector<double>(omegas)) {}

    static void validate(std::span<const double> omegas) {
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            const double w = omegas[i];
            if (!std::isfinite(w) || w <= 0.0 || w > kPi) {
                std::ostringstream msg;
                msg << "frequency " << i << " = " << w << " outside (0, pi]";
                throw InvalidFrequencyError(msg.str());
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (std::abs(omegas[j] - w) <= kDuplicateTolerance) {
                    std::ostringstream msg;
                    msg << "frequencies " << j << " and " << i << " coincide (" << w << ")";
                    throw InvalidFrequencyError(msg.str());
                }
            }
        }
    }

    [[nodiscard]] Index size() const { return static_cast<Index>(omegas_.size()); }
    [[nodiscard]] bool empty() const { return omegas_.empty(); }
    [[nodiscard]] double operator[](Index i) const { return omegas_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const double> values() const { return omegas_; }
    [[nodiscard]] const std::vector<double>& vector() const { return omegas_; }

    /// Copy with entry i replaced (re-validated).
    [[nodiscard]] FrequencyVector with(Index i, double omega) const {
        auto copy = omegas_;
        copy.at(static_cast<std::size_t>(i)) = omega;
        return FrequencyVector(std::move(copy));
    }

    friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;

private:
    std::vector<double> omegas_;
};

/// Equidistant sample times t_k = t0 + k * dt, k = 0..count-1.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    Index count = 2;

    [[nodiscard]] double time(Index k) const { return t0 + static_cast<double>(k) * dt; }

    void validate() const {
        if (count < 2) throw SizeError("time grid needs at least 2 samples");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time grid step must be positive");
        if (!std::isfinite(t0)) throw ConfigError("time grid origin must be finite");
    }

    /// Sample-index grid 0, 1, ..., count-1 used internally by the fitters.
    [[nodiscard]] static TimeGrid samples(Index count) { return TimeGrid{0.0, 1.0, count}; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// n x T snapshot matrix on an equidistant grid.
struct TimeSeries {
    Eigen::MatrixXd values;
    TimeGrid grid;

    TimeSeries() = default;
    TimeSeries(Eigen::MatrixXd v, TimeGrid g) : values(std::move(v)), grid(g) { validate(); }
    explicit TimeSeries(Eigen::MatrixXd v) : values(std::move(v)), grid(TimeGrid::samples(values.cols())) {
        validate();
    }

    [[nodiscard]] Index dims() const { return values.rows(); }
    [[nodiscard]] Index length() const { return values.cols(); }

    void validate() const {
        grid.validate();
        if (grid.count != values.cols()) throw DimensionError("time grid length does not match series length");
        if (!values.allFinite()) throw DegenerateInputError("time series contains non-finite values");
    }
};

using FeatureMatrix = Eigen::MatrixXd;

[[nodiscard]] inline constexpr Index feature_dim(Index num_frequencies) { return 2 * num_frequencies + 1; }

namespace detail {

/// Fills one feature column at time t. No validation.
inline void fill_feature_column(std::span<const double> omegas, double t, double* column) {
    const auto m = omegas.size();
    column[0] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double arg = omegas[i] * t;
        column[1 + i] = std::cos(arg);
        column[1 + m + i] = std::sin(arg);
    }
}

/// Same as fill_feature_column with a shared phase offset added to every argument.
inline void fill_feature_column(std::span<const double> omegas, double t, double phase, double* column) {
    const auto m = omegas.size();
    column[0] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double arg = omegas[i] * t + phase;
        column[1 + i] = std::cos(arg);
        column[1 + m + i] = std::sin(arg);
    }
}

inline FeatureMatrix features_at_times(std::span<const double> omegas, std::span<const double> times) {
    FeatureMatrix out(feature_dim(static_cast<Index>(omegas.size())), static_cast<Index>(times.size()));
    for (Index k = 0; k < out.cols(); ++k) fill_feature_column(omegas, times[static_cast<std::size_t>(k)], out.col(k).data());
    return out;
}

inline FeatureMatrix features_on_samples(std::span<const double> omegas, Index count) {
    FeatureMatrix out(feature_dim(static_cast<Index>(omegas.size())), count);
    for (Index k = 0; k < count; ++k) fill_feature_column(omegas, static_cast<double>(k), out.col(k).data());
    return out;
}

}  // namespace detail

/// Feature matrix Omega(w t) on every grid time, constant row first.
[[nodiscard]] inline FeatureMatrix features(const FrequencyVector& omegas, const TimeGrid& grid) {
    grid.validate();
    FeatureMatrix out(feature_dim(omegas.size()), grid.count);
    for (Index k = 0; k < grid.count; ++k) detail::fill_feature_column(omegas.values(), grid.time(k), out.col(k).data());
    return out;
}

/// Feature columns at arbitrary real times.
[[nodiscard]] inline FeatureMatrix features_at(const FrequencyVector& omegas, std::span<const double> times) {
    return detail::features_at_times(omegas.values(), times);
}

/// Derivative of the cos/sin rows of frequency i with respect to w_i.
///
/// Row 0 is -t sin(w_i t), row 1 is t cos(w_i t).
[[nodiscard]] inline Eigen::Matrix<double, 2, Eigen::Dynamic> features_gradient(const FrequencyVector& omegas,
                                                                              const TimeGrid& grid, Index i) {
    grid.validate();
    if (i < 0 || i >= omegas.size()) throw DimensionError("frequency index out of range");
    Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, grid.count);
    const double w = omegas[i];
    for (Index k = 0; k < grid.count; ++k) {
        const double t = grid.time(k);
        out(0, k) = -t * std::sin(w * t);
        out(1, k) = t * std::cos(w * t);
    }
    return out;
}

}  // namespace spectral
