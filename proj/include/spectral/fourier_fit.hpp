#pragma once

// Linear oscillator fitting: coordinate descent over frequencies. Each step
// seeds w_i at the argmin of the FFT error surface of the residual, refines it
// by gradient descent on the same one-dimensional loss off the bin grid, and
// re-solves the amplitude matrix by least squares.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/spectral_core.hpp"

namespace spectral {

struct FitConfig {
    Index num_frequencies = 1;
    int max_sweeps = 10;
    int gd_steps = 50;
    /// Step multiplier on the curvature-normalized gradient step (1 = Gauss-Newton).
    double gd_rate = 1.0;
    double gd_tolerance = 1e-13;
    double convergence_tolerance = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_frequencies < 1) throw ConfigError("num_frequencies must be >= 1");
        if (max_sweeps < 1 || gd_steps < 1) throw ConfigError("sweep and step counts must be >= 1");
        if (!(gd_rate > 0.0) || !(gd_tolerance > 0.0) || !(convergence_tolerance > 0.0))
            throw ConfigError("rates and tolerances must be positive");
    }
};

/// x_t ~ A Omega(w t); times are in sample units relative to grid.t0.
struct LinearOscillatorModel {
    FrequencyVector omegas;
    Eigen::MatrixXd amplitudes;  // n x (2m+1)
    TimeGrid grid;
    double training_loss = 0.0;

    [[nodiscard]] Index dims() const { return amplitudes.rows(); }
};

/// Loss after every coordinate step of a fit, for diagnostics and tests.
struct FitTrace {
    std::vector<double> step_losses;
    std::vector<double> sweep_losses;
    /// Frequencies in the order they were first extracted.
    std::vector<double> extraction_order;
};

namespace detail {

/// Relative pivot threshold below which the design is treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

inline double sum_squares(const Eigen::MatrixXd& m) { return m.squaredNorm(); }

/// Least-squares amplitudes for a design given as its (2m+1) x T feature matrix.
/// Rows that vanish identically on the grid (the sine row at w = pi) get zero amplitude.
inline Eigen::MatrixXd solve_design(const Eigen::MatrixXd& x, const Eigen::MatrixXd& design) {
    const Index p = design.rows();
    const Index T = design.cols();
    std::vector<Index> active;
    for (Index j = 0; j < p; ++j)
        if (design.row(j).norm() > 1e-12 * std::sqrt(static_cast<double>(T))) active.push_back(j);
    if (static_cast<Index>(active.size()) > T)
        throw ConditioningError("more basis functions than samples");
    Eigen::MatrixXd reduced(T, static_cast<Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) reduced.col(static_cast<Index>(k)) = design.row(active[k]).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(reduced);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < reduced.cols())
        throw ConditioningError("rank-deficient oscillator design (duplicate or near-duplicate frequencies)");
    const Eigen::MatrixXd coef = qr.solve(x.transpose());  // active x n
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x.rows(), p);
    for (std::size_t k = 0; k < active.size(); ++k) a.col(active[k]) = coef.row(static_cast<Index>(k)).transpose();
    return a;
}

inline bool too_close(double omega, std::span<const double> others, std::optional<Index> skip, double gap) {
    for (std::size_t j = 0; j < others.size(); ++j) {
        if (skip && static_cast<Index>(j) == *skip) continue;
        if (std::abs(others[j] - omega) < gap) return true;
    }
    return false;
}

}  // namespace detail

/// Least-squares amplitudes A (n x (2m+1)) for fixed frequencies on sample times 0..T-1.
[[nodiscard]] inline Eigen::MatrixXd solve_amplitudes(const Eigen::MatrixXd& x, std::span<const double> omegas) {
    if (feature_dim(static_cast<Index>(omegas.size())) > x.cols() + 1)
        throw ConditioningError("2m+1 basis functions exceed the number of samples");
    return detail::solve_design(x, detail::features_on_samples(omegas, x.cols()));
}

[[nodiscard]] inline Eigen::MatrixXd solve_amplitudes(const TimeSeries& x, const FrequencyVector& omegas) {
    return solve_amplitudes(x.values, omegas.values());
}

/// Total squared error of A Omega against x on sample times.
[[nodiscard]] inline double linear_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& amplitudes,
                                        std::span<const double> omegas) {
    return (x - amplitudes * detail::features_on_samples(omegas, x.cols())).squaredNorm();
}

/// Current parameters of a coordinate-descent fit.
struct LinearFitState {
    std::vector<double> omegas;
    Eigen::MatrixXd amplitudes;  // n x (2m+1)
};

/// Refines w_i by Gauss-Newton steps on E(w_i) = min_{b, a_i} ||r - b - a_i [cos; sin](w_i t)||^2,
/// where r removes every other oscillator at its current amplitudes. The bias
/// and pair i are re-solved for each trial frequency. A step that raises the
/// loss or leaves [seed - 2pi/T, seed + 2pi/T] halves the rate (up to 20 times).
[[nodiscard]] inline double refine_frequency(const Eigen::MatrixXd& x, const LinearFitState& state, Index i,
                                             const FitConfig& cfg) {
    const Index m = static_cast<Index>(state.omegas.size());
    if (i < 0 || i >= m) throw DimensionError("frequency index out of range");
    const Index T = x.cols();
    const Index n = x.rows();
    const double seed = state.omegas[static_cast<std::size_t>(i)];
    const double window = kTwoPi / static_cast<double>(T);

    Eigen::MatrixXd others = state.amplitudes;
    others.col(0).setZero();
    others.col(1 + i).setZero();
    others.col(1 + m + i).setZero();
    const Eigen::MatrixXd r = x - others * detail::features_on_samples(state.omegas, T);

    // coef rows: bias, cos, sin for each channel.
    auto evaluate = [&](double omega, Eigen::MatrixXd& coef) {
        Eigen::MatrixXd design(T, 3);
        for (Index t = 0; t < T; ++t) {
            const double tt = static_cast<double>(t);
            design(t, 0) = 1.0;
            design(t, 1) = std::cos(omega * tt);
            design(t, 2) = std::sin(omega * tt);
        }
        const Eigen::Matrix3d gram = design.transpose() * design;
        Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(gram);
        qr.setThreshold(detail::kRankTolerance);
        if (qr.rank() < 3) return std::numeric_limits<double>::infinity();
        coef = qr.solve(design.transpose() * r.transpose());
        return (r.transpose() - design * coef).squaredNorm();
    };

    double omega = seed;
    Eigen::MatrixXd coef;
    double loss = evaluate(omega, coef);
    if (!std::isfinite(loss)) return seed;
    for (int step = 0; step < cfg.gd_steps; ++step) {
        double num = 0.0, den = 0.0;
        for (Index t = 0; t < T; ++t) {
            const double tt = static_cast<double>(t);
            const double c = std::cos(omega * tt), sn = std::sin(omega * tt);
            for (Index l = 0; l < n; ++l) {
                const double fit = coef(0, l) + coef(1, l) * c + coef(2, l) * sn;
                const double d = tt * (-coef(1, l) * sn + coef(2, l) * c);
                num += (r(l, t) - fit) * d;
                den += d * d;
            }
        }
        if (!(den > 0.0)) break;
        const double direction = num / den;
        if (direction == 0.0 || !std::isfinite(direction)) break;
        double rate = cfg.gd_rate;
        bool accepted = false;
        double moved = 0.0;
        for (int halving = 0; halving <= 20; ++halving, rate *= 0.5) {
            const double candidate = omega + rate * direction;
            if (candidate <= 0.0 || candidate > kPi || std::abs(candidate - seed) > window) continue;
            Eigen::MatrixXd trial;
            const double trial_loss = evaluate(candidate, trial);
            if (trial_loss <= loss) {
                moved = candidate - omega;
                omega = candidate;
                coef = std::move(trial);
                loss = trial_loss;
                accepted = true;
                break;
            }
        }
        if (!accepted || std::abs(moved) < cfg.gd_tolerance) break;
    }
    return omega;
}

namespace detail {

/// One prediction column; evaluation order is fixed so each column depends
/// only on the model and its own time.
inline void predict_linear_column(const LinearOscillatorModel& model, double time, double* out) {
    const Index m = model.omegas.size();
    const double s = (time - model.grid.t0) / model.grid.dt;
    const Index n = model.amplitudes.rows();
    for (Index l = 0; l < n; ++l) out[l] = model.amplitudes(l, 0);
    for (Index i = 0; i < m; ++i) {
        const double arg = model.omegas[i] * s;
        const double c = std::cos(arg);
        const double sn = std::sin(arg);
        for (Index l = 0; l < n; ++l) out[l] += model.amplitudes(l, 1 + i) * c + model.amplitudes(l, 1 + m + i) * sn;
    }
}

}  // namespace detail

/// A Omega(w s) at arbitrary times, s = (time - t0) / dt.
[[nodiscard]] inline Eigen::MatrixXd predict_linear(const LinearOscillatorModel& model, std::span<const double> times) {
    Eigen::MatrixXd out(model.amplitudes.rows(), static_cast<Index>(times.size()));
    for (Index h = 0; h < out.cols(); ++h) detail::predict_linear_column(model, times[static_cast<std::size_t>(h)], out.col(h).data());
    return out;
}

/// Sample times of a grid as a vector.
[[nodiscard]] inline std::vector<double> grid_times(const TimeGrid& grid) {
    std::vector<double> times(static_cast<std::size_t>(grid.count));
    for (Index k = 0; k < grid.count; ++k) times[static_cast<std::size_t>(k)] = grid.time(k);
    return times;
}

/// Training loss recomputed through predict_linear on the training grid.
[[nodiscard]] inline double training_loss_of(const LinearOscillatorModel& model, const TimeSeries& series) {
    const auto times = grid_times(series.grid);
    return (series.values - predict_linear(model, times)).squaredNorm();
}

/// Coordinate-descent fit of a linear oscillator model.
[[nodiscard]] inline LinearOscillatorModel fit_fourier(const TimeSeries& series, const FitConfig& cfg,
                                                       FitTrace* trace = nullptr) {
    cfg.validate();
    series.validate();
    const Eigen::MatrixXd& x = series.values;
    const Index T = x.cols();
    const Index m = cfg.num_frequencies;
    if (feature_dim(m) > T) throw ConditioningError("2m+1 exceeds the number of samples");
    if (T < 4) throw SizeError("fit needs at least 4 samples");
    const double collision_gap = kTwoPi / (4.0 * static_cast<double>(T));

    LinearFitState state;
    state.amplitudes = Eigen::MatrixXd::Zero(x.rows(), 1);
    double loss = x.squaredNorm();

    auto propose = [&](const LinearFitState& base, std::optional<Index> slot) -> std::optional<double> {
        const Eigen::MatrixXd r = residual(x, base.amplitudes, base.omegas, slot);
        const auto surface = error_surface_linear(r);
        const auto seed = argmin_surface_where(surface, [&](double w) {
            return !detail::too_close(w, base.omegas, slot, collision_gap);
        });
        if (!seed) return std::nullopt;
        return seed->omega;
    };

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        const double sweep_start = loss;
        for (Index i = 0; i < m; ++i) {
            const bool adding = static_cast<Index>(state.omegas.size()) <= i;
            std::optional<Index> slot;
            if (!adding) slot = i;

            const auto seed = propose(state, slot);
            if (!seed && adding) throw ConditioningError("no admissible frequency bin left on the surface");

            // Candidates: the surface argmin and (after the first sweep) the
            // incumbent, each refined off-grid and scored by the full loss.
            struct Candidate {
                LinearFitState fit;
                double loss;
            };
            std::optional<Candidate> best;
            auto consider = [&](double start) {
                LinearFitState probe = state;
                if (adding) probe.omegas.push_back(start);
                else probe.omegas[static_cast<std::size_t>(i)] = start;
                const Index k = adding ? static_cast<Index>(probe.omegas.size()) - 1 : i;
                try {
                    probe.amplitudes = solve_amplitudes(x, probe.omegas);
                } catch (const ConditioningError&) {
                    return;
                }
                double w = refine_frequency(x, probe, k, cfg);
                if (detail::too_close(w, state.omegas, slot, collision_gap)) w = start;
                probe.omegas[static_cast<std::size_t>(k)] = w;
                try {
                    probe.amplitudes = solve_amplitudes(x, probe.omegas);
                } catch (const ConditioningError&) {
                    return;
                }
                const double l = linear_loss(x, probe.amplitudes, probe.omegas);
                if (!best || l < best->loss) best = Candidate{std::move(probe), l};
            };
            if (seed) consider(*seed);
            if (!adding) consider(state.omegas[static_cast<std::size_t>(i)]);
            if (!best) throw ConditioningError("no well-conditioned frequency candidate");

            if (adding || best->loss <= loss) {
                if (adding && trace) trace->extraction_order.push_back(best->fit.omegas.back());
                state = std::move(best->fit);
                loss = best->loss;
            }
            if (trace) trace->step_losses.push_back(loss);
        }
        if (trace) trace->sweep_losses.push_back(loss);
        const double decrease = sweep_start - loss;
        if (sweep > 0 && decrease <= cfg.convergence_tolerance * std::max(sweep_start, std::numeric_limits<double>::min()))
            break;
    }

    LinearOscillatorModel model;
    model.omegas = FrequencyVector(state.omegas);
    model.amplitudes = state.amplitudes;
    model.grid = series.grid;
    model.training_loss = training_loss_of(model, series);
    return model;
}

}  // namespace spectral
