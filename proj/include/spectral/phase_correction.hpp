#pragma once

// Fourier fit with a shared drifting phase:
//
//     J = sum_t ||x_t - A Omega(w t + phi_t)||^2 + beta sum_t |phi_t - phi_{t-1}|
//
// minimized by alternating phase steps with frequency refinement and
// amplitude solves on the phase-warped grid. A phase step solves the chain
// problem exactly on a phase grid by dynamic programming, then polishes each
// phi_t by golden-section search (red-black order).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"
#include "spectral/fourier_fit.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/parallel.hpp"

namespace spectral {

struct PhaseTrack {
    std::vector<double> phi;
    /// beta; +inf pins the phase.
    double tv_weight = 1.0;

    [[nodiscard]] double tv_norm() const {
        double s = 0.0;
        for (std::size_t t = 1; t < phi.size(); ++t) s += std::abs(phi[t] - phi[t - 1]);
        return s;
    }
};

struct PhaseFitOptions {
    int alternations = 30;
    int golden_iters = 40;
    double tolerance = 1e-9;
    /// Phase grid points per 2 pi for the chain solve; 0 disables it.
    Index grid_per_turn = 256;
};

struct PhaseCorrectedFit {
    LinearOscillatorModel model;
    PhaseTrack track;
    /// Objective after initialization and after every alternation.
    std::vector<double> objective_history;
};

namespace detail {

inline Eigen::MatrixXd warped_features(std::span<const double> omegas, std::span<const double> phi) {
    const Index T = static_cast<Index>(phi.size());
    Eigen::MatrixXd z(feature_dim(static_cast<Index>(omegas.size())), T);
    for (Index t = 0; t < T; ++t)
        fill_feature_column(omegas, static_cast<double>(t), phi[static_cast<std::size_t>(t)], z.col(t).data());
    return z;
}

inline double column_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a, std::span<const double> omegas, Index t,
                          double phi, double* scratch) {
    fill_feature_column(omegas, static_cast<double>(t), phi, scratch);
    const Index p = a.cols();
    double s = 0.0;
    for (Index l = 0; l < x.rows(); ++l) {
        double v = 0.0;
        for (Index j = 0; j < p; ++j) v += a(l, j) * scratch[j];
        const double r = x(l, t) - v;
        s += r * r;
    }
    return s;
}

inline double pc_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a, std::span<const double> omegas,
                           std::span<const double> phi, double beta) {
    double data = (x - a * warped_features(omegas, phi)).squaredNorm();
    if (std::isinf(beta)) return data;
    double tv = 0.0;
    for (std::size_t t = 1; t < phi.size(); ++t) tv += std::abs(phi[t] - phi[t - 1]);
    return data + beta * tv;
}

/// Largest T x G back-pointer table the chain solve will allocate.
inline constexpr Index kMaxChainCells = Index{1} << 25;

/// Minimizer of sum_t column_loss(t, phi_t) + beta sum_t |phi_t - phi_{t-1}| over
/// phases on a uniform grid spanning the current track widened by pi on each
/// side. Empty when the table would exceed kMaxChainCells.
inline std::vector<double> phase_chain_dp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a,
                                          std::span<const double> omegas, std::span<const double> phi, double beta,
                                          Index per_turn) {
    const Index T = x.cols();
    const auto [lo_it, hi_it] = std::minmax_element(phi.begin(), phi.end());
    const double step = kTwoPi / static_cast<double>(per_turn);
    const double lo = *lo_it - kPi;
    const Index G = static_cast<Index>(std::ceil((*hi_it + kPi - lo) / step)) + 1;
    if (T * G > kMaxChainCells) return {};
    const double jump = beta * step;

    std::vector<std::int32_t> from(static_cast<std::size_t>(T * G));
    std::vector<double> cost(static_cast<std::size_t>(G)), best(static_cast<std::size_t>(G));
    std::vector<std::int32_t> arg(static_cast<std::size_t>(G));
    std::vector<double> scratch(static_cast<std::size_t>(feature_dim(static_cast<Index>(omegas.size()))));
    auto add_data = [&](Index t, std::vector<double>& c) {
        for (Index g = 0; g < G; ++g)
            c[static_cast<std::size_t>(g)] +=
                column_loss(x, a, omegas, t, lo + step * static_cast<double>(g), scratch.data());
    };
    std::fill(cost.begin(), cost.end(), 0.0);
    add_data(0, cost);
    for (Index t = 1; t < T; ++t) {
        // min over g' of cost[g'] + jump |g - g'| by one pass in each direction.
        for (Index g = 0; g < G; ++g) {
            best[static_cast<std::size_t>(g)] = cost[static_cast<std::size_t>(g)];
            arg[static_cast<std::size_t>(g)] = static_cast<std::int32_t>(g);
        }
        for (Index g = 1; g < G; ++g) {
            const auto k = static_cast<std::size_t>(g);
            if (best[k - 1] + jump < best[k]) best[k] = best[k - 1] + jump, arg[k] = arg[k - 1];
        }
        for (Index g = G - 2; g >= 0; --g) {
            const auto k = static_cast<std::size_t>(g);
            if (best[k + 1] + jump < best[k]) best[k] = best[k + 1] + jump, arg[k] = arg[k + 1];
        }
        std::copy(arg.begin(), arg.end(), from.begin() + static_cast<std::ptrdiff_t>(t * G));
        cost = best;
        add_data(t, cost);
    }
    std::vector<double> out(static_cast<std::size_t>(T));
    auto g = static_cast<Index>(std::min_element(cost.begin(), cost.end()) - cost.begin());
    for (Index t = T - 1; t >= 0; --t) {
        out[static_cast<std::size_t>(t)] = lo + step * static_cast<double>(g);
        if (t > 0) g = from[static_cast<std::size_t>(t * G + g)];
    }
    return out;
}

/// Pair-envelope Gauss-Newton for w_i on the warped grid (angles w_i t + phi_t).
inline double refine_frequency_warped(const Eigen::MatrixXd& x, std::span<const double> omegas,
                                      const Eigen::MatrixXd& a, Index i, std::span<const double> phi,
                                      const FitConfig& cfg) {
    const Index m = static_cast<Index>(omegas.size());
    const Index T = x.cols();
    Eigen::MatrixXd a_ex = a;
    a_ex.col(1 + i).setZero();
    a_ex.col(1 + m + i).setZero();
    const Eigen::MatrixXd r = x - a_ex * warped_features(omegas, phi);
    auto pair_fit = [&](double w, Eigen::MatrixXd& coef) {
        Eigen::MatrixXd basis(T, 2);
        for (Index t = 0; t < T; ++t) {
            const double ang = w * static_cast<double>(t) + phi[static_cast<std::size_t>(t)];
            basis(t, 0) = std::cos(ang);
            basis(t, 1) = std::sin(ang);
        }
        const Eigen::Matrix2d gram = basis.transpose() * basis;
        coef = (r * basis) * gram.inverse();
        return (r - coef * basis.transpose()).squaredNorm();
    };
    const double seed = omegas[static_cast<std::size_t>(i)];
    const double window = kTwoPi / static_cast<double>(T);
    double w = seed;
    Eigen::MatrixXd coef;
    double loss = pair_fit(w, coef);
    if (!std::isfinite(loss)) return seed;
    for (int step = 0; step < cfg.gd_steps; ++step) {
        double num = 0.0, den = 0.0;
        for (Index t = 0; t < T; ++t) {
            const double tt = static_cast<double>(t);
            const double ang = w * tt + phi[static_cast<std::size_t>(t)];
            const double c = std::cos(ang), s = std::sin(ang);
            for (Index l = 0; l < x.rows(); ++l) {
                const double fit = coef(l, 0) * c + coef(l, 1) * s;
                const double d = tt * (-coef(l, 0) * s + coef(l, 1) * c);
                num += (r(l, t) - fit) * d;
                den += d * d;
            }
        }
        if (!(den > 0.0)) break;
        const double dir = num / den;
        double rate = cfg.gd_rate;
        bool accepted = false;
        double moved = 0.0;
        for (int h = 0; h <= 20; ++h, rate *= 0.5) {
            const double cand = w + rate * dir;
            if (cand <= 0.0 || cand > kPi || std::abs(cand - seed) > window) continue;
            Eigen::MatrixXd cc;
            const double l = pair_fit(cand, cc);
            if (l <= loss) {
                moved = cand - w;
                w = cand;
                coef = std::move(cc);
                loss = l;
                accepted = true;
                break;
            }
        }
        if (!accepted || std::abs(moved) < cfg.gd_tolerance) break;
    }
    return w;
}

}  // namespace detail

[[nodiscard]] inline PhaseCorrectedFit fit_fourier_pc(const TimeSeries& series, const FitConfig& cfg, double tv_weight,
                                                      const PhaseFitOptions& opts = {}) {
    if (!(tv_weight >= 0.0)) throw ConfigError("tv_weight must be >= 0");
    const Eigen::MatrixXd& x = series.values;
    const Index T = x.cols();
    const bool pinned = std::isinf(tv_weight);

    PhaseCorrectedFit out;
    out.model = fit_fourier(series, cfg);
    std::vector<double> omegas = out.model.omegas.vector();
    Eigen::MatrixXd a = out.model.amplitudes;
    std::vector<double> phi(static_cast<std::size_t>(T), 0.0);
    double objective = detail::pc_objective(x, a, omegas, phi, tv_weight);
    out.objective_history.push_back(objective);
    const Index m = static_cast<Index>(omegas.size());

    for (int iter = 0; iter < opts.alternations; ++iter) {
        const double start = objective;

        if (!pinned) {
            if (opts.grid_per_turn > 0) {
                auto cand = detail::phase_chain_dp(x, a, omegas, phi, tv_weight, opts.grid_per_turn);
                if (!cand.empty()) {
                    const double v = detail::pc_objective(x, a, omegas, cand, tv_weight);
                    if (v < objective) {
                        phi = std::move(cand);
                        objective = v;
                    }
                }
            }
            // Polish: red-black so each update sees fixed neighbours.
            for (int parity = 0; parity < 2; ++parity) {
                parallel_for(0, (T - parity + 1) / 2, [&](long k) {
                    const Index t = 2 * k + parity;
                    std::vector<double> scratch(static_cast<std::size_t>(feature_dim(m)));
                    const bool has_prev = t > 0, has_next = t + 1 < T;
                    const double prev = has_prev ? phi[static_cast<std::size_t>(t - 1)] : 0.0;
                    const double next = has_next ? phi[static_cast<std::size_t>(t + 1)] : 0.0;
                    auto f = [&](double p) {
                        double v = detail::column_loss(x, a, omegas, t, p, scratch.data());
                        if (has_prev) v += tv_weight * std::abs(p - prev);
                        if (has_next) v += tv_weight * std::abs(next - p);
                        return v;
                    };
                    const double cur = phi[static_cast<std::size_t>(t)];
                    double lo = cur, hi = cur;
                    if (has_prev) lo = std::min(lo, prev), hi = std::max(hi, prev);
                    if (has_next) lo = std::min(lo, next), hi = std::max(hi, next);
                    lo -= kPi / 4.0;
                    hi += kPi / 4.0;
                    double best_p = cur, best_v = f(cur);
                    auto offer = [&](double p) {
                        const double v = f(p);
                        if (v < best_v) best_v = v, best_p = p;
                    };
                    if (has_prev) offer(prev);
                    if (has_next) offer(next);
                    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
                    double p1 = hi - g * (hi - lo), p2 = lo + g * (hi - lo);
                    double f1 = f(p1), f2 = f(p2);
                    for (int it = 0; it < opts.golden_iters; ++it) {
                        if (f1 < f2) {
                            hi = p2, p2 = p1, f2 = f1;
                            p1 = hi - g * (hi - lo), f1 = f(p1);
                        } else {
                            lo = p1, p1 = p2, f1 = f2;
                            p2 = lo + g * (hi - lo), f2 = f(p2);
                        }
                    }
                    offer(p1);
                    offer(p2);
                    phi[static_cast<std::size_t>(t)] = best_p;
                }, 64);
            }
            objective = detail::pc_objective(x, a, omegas, phi, tv_weight);
        }

        // Frequency and amplitude step on the warped grid.
        for (Index i = 0; i < m; ++i) {
            auto cand = omegas;
            cand[static_cast<std::size_t>(i)] = detail::refine_frequency_warped(x, omegas, a, i, phi, cfg);
            if (detail::too_close(cand[static_cast<std::size_t>(i)], omegas, i, kTwoPi / (4.0 * static_cast<double>(T))))
                continue;
            Eigen::MatrixXd ca;
            try {
                ca = detail::solve_design(x, detail::warped_features(cand, phi));
            } catch (const ConditioningError&) {
                continue;
            }
            const double v = detail::pc_objective(x, ca, cand, phi, tv_weight);
            if (v <= objective) {
                omegas = std::move(cand);
                a = std::move(ca);
                objective = v;
            }
        }
        out.objective_history.push_back(objective);
        if (start - objective <= opts.tolerance * std::max(start, std::numeric_limits<double>::min())) break;
    }

    out.model.omegas = FrequencyVector(omegas);
    out.model.amplitudes = a;
    out.model.grid = series.grid;
    out.model.training_loss = (x - a * detail::warped_features(omegas, phi)).squaredNorm();
    out.track.phi = std::move(phi);
    out.track.tv_weight = tv_weight;
    return out;
}

/// Phase at sample position s: linear between fitted samples, held outside them.
[[nodiscard]] inline double phase_at(const PhaseTrack& track, double s) {
    if (track.phi.empty()) return 0.0;
    const double last = static_cast<double>(track.phi.size() - 1);
    if (!(s > 0.0)) return track.phi.front();
    if (s >= last) return track.phi.back();
    const auto k = static_cast<std::size_t>(std::floor(s));
    const double f = s - static_cast<double>(k);
    return track.phi[k] + f * (track.phi[k + 1] - track.phi[k]);
}

[[nodiscard]] inline Eigen::MatrixXd predict_pc(const LinearOscillatorModel& model, const PhaseTrack& track,
                                                std::span<const double> times) {
    const Index m = model.omegas.size();
    const Index n = model.amplitudes.rows();
    Eigen::MatrixXd out(n, static_cast<Index>(times.size()));
    for (Index h = 0; h < out.cols(); ++h) {
        const double s = (times[static_cast<std::size_t>(h)] - model.grid.t0) / model.grid.dt;
        const double p = phase_at(track, s);
        for (Index l = 0; l < n; ++l) out(l, h) = model.amplitudes(l, 0);
        for (Index i = 0; i < m; ++i) {
            const double arg = model.omegas[i] * s + p;
            const double c = std::cos(arg), sn = std::sin(arg);
            for (Index l = 0; l < n; ++l) out(l, h) += model.amplitudes(l, 1 + i) * c + model.amplitudes(l, 1 + m + i) * sn;
        }
    }
    return out;
}

}  // namespace spectral
