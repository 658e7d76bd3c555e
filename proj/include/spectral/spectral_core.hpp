#pragma once

// Real-input DFT utilities and the closed-form linear error surface.
//
// For a residual R (n x T) and an FFT bin w_b = 2 pi b / T with 0 < b < T/2,
// the loss of the best two-column fit a cos(w_b t) + c sin(w_b t) per row is
//
//     E(w_b) = ||R||_F^2 - sum_l (2/T) |R^_{l,b}|^2
//
// because the cos and sin columns are orthogonal with squared norm T/2 on
// these bins. DC and the Nyquist bin are never candidates.

#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"

namespace spectral {

using Complex = std::complex<double>;

/// Non-negative half of an unnormalized forward DFT, c_b = sum_t s_t e^{-j 2 pi b t / T}.
struct Spectrum {
    std::vector<Complex> coefficients;  // length floor(T/2) + 1
    Index source_length = 0;
};

using Residual = Eigen::MatrixXd;

struct SurfacePoint {
    double omega = 0.0;
    double loss = 0.0;
};

/// Sampled loss versus frequency.
struct ErrorSurface {
    std::vector<double> grid_omegas;  // strictly increasing, in (0, pi]
    std::vector<double> losses;
    std::optional<SurfacePoint> refined_minimum;

    [[nodiscard]] std::size_t size() const { return grid_omegas.size(); }
};

namespace detail {

/// Full-length complex forward DFT of a real sequence.
inline std::vector<Complex> fft_real_full(std::span<const double> signal) {
    Eigen::FFT<double> fft;
    std::vector<double> in(signal.begin(), signal.end());
    std::vector<Complex> out;
    fft.fwd(out, in);
    return out;
}

/// Unscaled inverse DFT: out_g = sum_l spectrum_l e^{+j 2 pi l g / M}.
inline std::vector<Complex> ifft_unscaled(const std::vector<Complex>& spectrum) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<Complex> out;
    fft.inv(out, spectrum);
    return out;
}

/// Smallest length >= n with no prime factor above 5.
inline Index smooth_length(Index n) {
    for (Index m = std::max<Index>(n, 1);; ++m) {
        Index r = m;
        for (Index p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

}  // namespace detail

[[nodiscard]] inline Spectrum real_dft(std::span<const double> signal) {
    if (signal.size() < 2) throw SizeError("real_dft needs at least 2 samples");
    const auto full = detail::fft_real_full(signal);
    Spectrum s;
    s.source_length = static_cast<Index>(signal.size());
    s.coefficients.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(signal.size() / 2 + 1));
    // Exact zeros where the spectrum of a real signal is real.
    s.coefficients.front().imag(0.0);
    if (signal.size() % 2 == 0) s.coefficients.back().imag(0.0);
    return s;
}

[[nodiscard]] inline Spectrum real_dft(const Eigen::Ref<const Eigen::VectorXd>& signal) {
    return real_dft(std::span<const double>(signal.data(), static_cast<std::size_t>(signal.size())));
}

/// x - A Omega(w t) on sample times t = 0..T-1, skipping the cos and sin
/// columns of frequency `exclude` (the constant column is always kept).
[[nodiscard]] inline Residual residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& amplitudes,
                                       std::span<const double> omegas, std::optional<Index> exclude) {
    const Index m = static_cast<Index>(omegas.size());
    if (amplitudes.rows() != x.rows() || amplitudes.cols() != feature_dim(m))
        throw DimensionError("amplitude matrix must be n x (2m+1)");
    if (exclude && (*exclude < 0 || *exclude >= m)) throw DimensionError("excluded frequency index out of range");
    Eigen::MatrixXd a = amplitudes;
    if (exclude) {
        a.col(1 + *exclude).setZero();
        a.col(1 + m + *exclude).setZero();
    }
    return x - a * detail::features_on_samples(omegas, x.cols());
}

[[nodiscard]] inline Residual residual(const TimeSeries& x, const Eigen::MatrixXd& amplitudes,
                                       const FrequencyVector& omegas, Index exclude) {
    return residual(x.values, amplitudes, omegas.values(), exclude);
}

/// Candidate bins 0 < b < T/2 for a length-T series.
[[nodiscard]] inline Index surface_bin_count(Index T) { return (T - 1) / 2; }

[[nodiscard]] inline ErrorSurface error_surface_linear(const Residual& r) {
    const Index T = r.cols();
    if (T < 4) throw SizeError("error surface needs at least 4 samples");
    const Index bins = surface_bin_count(T);
    const double energy = r.squaredNorm();
    std::vector<double> captured(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> row(static_cast<std::size_t>(T));
    for (Index l = 0; l < r.rows(); ++l) {
        for (Index t = 0; t < T; ++t) row[static_cast<std::size_t>(t)] = r(l, t);
        const auto spec = detail::fft_real_full(row);
        for (Index b = 1; b <= bins; ++b) captured[static_cast<std::size_t>(b - 1)] += std::norm(spec[static_cast<std::size_t>(b)]);
    }
    ErrorSurface s;
    s.grid_omegas.resize(static_cast<std::size_t>(bins));
    s.losses.resize(static_cast<std::size_t>(bins));
    for (Index b = 1; b <= bins; ++b) {
        const auto k = static_cast<std::size_t>(b - 1);
        s.grid_omegas[k] = kTwoPi * static_cast<double>(b) / static_cast<double>(T);
        s.losses[k] = energy - 2.0 / static_cast<double>(T) * captured[k];
    }
    return s;
}

/// Grid point with the smallest loss among those accepted by `allowed`;
/// ties go to the smallest frequency. Returns nothing if no point qualifies.
[[nodiscard]] inline std::optional<SurfacePoint> argmin_surface_where(const ErrorSurface& surface,
                                                                      const std::function<bool(double)>& allowed) {
    std::optional<SurfacePoint> best;
    for (std::size_t k = 0; k < surface.size(); ++k) {
        if (allowed && !allowed(surface.grid_omegas[k])) continue;
        if (!best || surface.losses[k] < best->loss) best = SurfacePoint{surface.grid_omegas[k], surface.losses[k]};
    }
    return best;
}

[[nodiscard]] inline SurfacePoint argmin_surface(const ErrorSurface& surface) {
    if (surface.size() == 0) throw SizeError("argmin of an empty error surface");
    if (surface.losses.size() != surface.grid_omegas.size()) throw DimensionError("surface grid and losses differ in length");
    return *argmin_surface_where(surface, {});
}

}  // namespace spectral
