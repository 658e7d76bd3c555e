#pragma once

// Nonlinear oscillator fitting, x_t ~ f(Omega(w t)).
//
// For frequency i and time t the local loss L_t(w) = ||x_t - f(Omega)||^2,
// with w_i = w and everything else fixed, depends on w only through the angle
// w t, so it is 2 pi / t periodic. Sampling one period at angles 2 pi n / N
// gives N values whose trigonometric interpolant is
//
//     L_t(theta) = (1/N) sum_q C_{t,q} e^{j q theta},  |q| <= N/2.
//
// Summing over t, the global loss sum_t L_t(w t) has Fourier coefficients
// E_l = sum_{t q = l} C_{t,q} (index dilation by t), and one inverse FFT of
// length K T evaluates it on the fine grid w_g = pi g / G, G = K T / 2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spectral/decoder.hpp"
#include "spectral/errors.hpp"
#include "spectral/fourier_fit.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/parallel.hpp"
#include "spectral/random.hpp"
#include "spectral/spectral_core.hpp"

namespace spectral {

struct KoopmanConfig {
    FitConfig fit;
    std::vector<Index> hidden = {32, 32};
    Activation activation = Activation::tanh;
    int inner_gd_iters = 200;
    int restarts = 3;
    /// Samples per local-loss period (N); the local spectra have K = 2N points.
    Index samples_per_period = 64;
    double learning_rate = 1e-2;
    /// Number of decoder-input rotations 2 pi k / P scanned with every curve.
    int phase_candidates = 4;

    void validate() const {
        fit.validate();
        if (inner_gd_iters < 0) throw ConfigError("inner_gd_iters must be >= 0");
        if (restarts < 1) throw ConfigError("restarts must be >= 1");
        if (samples_per_period < 4) throw ConfigError("samples_per_period must be >= 4");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (phase_candidates < 1) throw ConfigError("phase_candidates must be >= 1");
    }
};

struct KoopmanModel {
    FrequencyVector omegas;
    DecoderParams decoder;
    TimeGrid grid;
    double training_loss = 0.0;

    [[nodiscard]] Index dims() const { return decoder.output_dim(); }
};

struct GlobalLossSpectrum {
    std::vector<Complex> e_hat;  // length K * (number of local spectra) + 1
    Index K = 0;
    /// Samples per period of the local losses; fixes the 1/N scale of the curve.
    Index N = 0;
};

struct KoopmanTrace {
    std::vector<double> block_losses;
    std::vector<double> sweep_losses;
    std::vector<double> restart_losses;
};

/// Largest K * T for which a global curve is computed.
inline constexpr Index kMaxCurvePoints = Index{1} << 22;

namespace detail {

/// Features on sample times with w_i replaced by `omega_i` and `phase` added to its angle.
inline Eigen::MatrixXd features_with_phase(std::span<const double> omegas, Index count, Index i, double omega_i,
                                           double phase) {
    const Index m = static_cast<Index>(omegas.size());
    Eigen::MatrixXd z = features_on_samples(omegas, count);
    for (Index t = 0; t < count; ++t) {
        const double a = omega_i * static_cast<double>(t) + phase;
        z(1 + i, t) = std::cos(a);
        z(1 + m + i, t) = std::sin(a);
    }
    return z;
}

/// Local losses for t = 1..T-1 (rows) at angles 2 pi n / N, n = 1..N (columns).
inline Eigen::MatrixXd local_loss_table(const Eigen::MatrixXd& x, std::span<const double> omegas,
                                        const DecoderParams& decoder, Index i, Index N) {
    const Index m = static_cast<Index>(omegas.size());
    const Index T = x.cols();
    Eigen::MatrixXd table(T - 1, N);
    if (m == 1) {
        // The decoder input does not depend on t, so N evaluations cover every row.
        Eigen::MatrixXd z(3, N);
        for (Index n = 1; n <= N; ++n) {
            const double a = kTwoPi * static_cast<double>(n) / static_cast<double>(N);
            z(0, n - 1) = 1.0;
            z(1, n - 1) = std::cos(a);
            z(2, n - 1) = std::sin(a);
        }
        const Eigen::MatrixXd y = forward(decoder, z);
        parallel_for(1, T, [&](long t) {
            for (Index n = 0; n < N; ++n) table(t - 1, n) = (x.col(t) - y.col(n)).squaredNorm();
        }, 256);
        return table;
    }
    parallel_for(1, T, [&](long t) {
        Eigen::MatrixXd z(feature_dim(m), N);
        for (Index n = 1; n <= N; ++n) {
            fill_feature_column(omegas, static_cast<double>(t), z.col(n - 1).data());
            const double a = kTwoPi * static_cast<double>(n) / static_cast<double>(N);
            z(1 + i, n - 1) = std::cos(a);
            z(1 + m + i, n - 1) = std::sin(a);
        }
        const Eigen::MatrixXd y = forward(decoder, z);
        for (Index n = 0; n < N; ++n) table(t - 1, n) = (x.col(t) - y.col(n)).squaredNorm();
    }, 16);
    return table;
}

}  // namespace detail

/// One period of the t-th local loss: entry n-1 is the loss at w_i = (n/N)(2 pi / t), n = 1..N.
[[nodiscard]] inline std::vector<double> sample_local_loss(const Eigen::MatrixXd& x, std::span<const double> omegas,
                                                           const DecoderParams& decoder, Index i, Index t, Index N) {
    const Index m = static_cast<Index>(omegas.size());
    if (i < 0 || i >= m) throw DimensionError("frequency index out of range");
    if (t < 1 || t >= x.cols()) throw DimensionError("local loss needs 1 <= t < T");
    if (N < 4) throw ConfigError("N must be >= 4");
    if (decoder.input_dim() != feature_dim(m) || decoder.output_dim() != x.rows())
        throw DimensionError("decoder shape does not match the model");
    Eigen::MatrixXd z(feature_dim(m), N);
    for (Index n = 1; n <= N; ++n) {
        detail::fill_feature_column(omegas, static_cast<double>(t), z.col(n - 1).data());
        const double s = static_cast<double>(n) / static_cast<double>(N) * kTwoPi / static_cast<double>(t);
        z(1 + i, n - 1) = std::cos(s * static_cast<double>(t));
        z(1 + m + i, n - 1) = std::sin(s * static_cast<double>(t));
    }
    const Eigen::MatrixXd y = forward(decoder, z);
    std::vector<double> out(static_cast<std::size_t>(N));
    for (Index n = 0; n < N; ++n) out[static_cast<std::size_t>(n)] = (x.col(t) - y.col(n)).squaredNorm();
    return out;
}

/// Harmonic coefficients C_q = sum_n S[n] e^{-j 2 pi n q / N} of one sampled
/// period for q = 0..N/2 (the Nyquist term halved so the two-sided
/// interpolant is real), zero-padded to q = K with K = 2N.
[[nodiscard]] inline std::vector<Complex> local_spectrum(std::span<const double> samples, Index K) {
    const Index N = static_cast<Index>(samples.size());
    if (N < 1) throw SizeError("local spectrum needs samples");
    if (K != 2 * N) throw ConfigError("local spectrum requires K = 2N");
    const auto full = detail::fft_real_full(samples);  // sum_k S[k+1] e^{-j 2 pi k q / N}
    std::vector<Complex> out(static_cast<std::size_t>(K + 1), Complex{0.0, 0.0});
    for (Index q = 0; q <= N / 2; ++q) {
        const double a = -kTwoPi * static_cast<double>(q) / static_cast<double>(N);
        Complex c = full[static_cast<std::size_t>(q)] * Complex{std::cos(a), std::sin(a)};
        if (2 * q == N) c *= 0.5;
        out[static_cast<std::size_t>(q)] = c;
    }
    out[0] = Complex{out[0].real(), 0.0};
    return out;
}

/// E[l] = sum over (t, k) with t k = l of locals[t-1][k], t = 1..locals.size().
[[nodiscard]] inline GlobalLossSpectrum assemble_global_spectrum(const std::vector<std::vector<Complex>>& locals,
                                                                 Index K, Index N) {
    const Index T = static_cast<Index>(locals.size());
    GlobalLossSpectrum g;
    g.K = K;
    g.N = N;
    g.e_hat.assign(static_cast<std::size_t>(K * T + 1), Complex{0.0, 0.0});
    for (Index t = 1; t <= T; ++t) {
        const auto& s = locals[static_cast<std::size_t>(t - 1)];
        if (static_cast<Index>(s.size()) != K + 1) throw DimensionError("local spectrum length must be K + 1");
        for (Index k = 0; k <= K; ++k) g.e_hat[static_cast<std::size_t>(t * k)] += s[static_cast<std::size_t>(k)];
    }
    return g;
}

/// sum_t L_t(w_g) on w_g = 2 pi g / M, g = 1..M/2, via one inverse FFT of
/// length M, the first 2-3-5 smooth length >= K T.
[[nodiscard]] inline ErrorSurface global_loss_curve(const GlobalLossSpectrum& spectrum, double offset = 0.0) {
    const Index L = static_cast<Index>(spectrum.e_hat.size());
    const Index M = detail::smooth_length(L - 1);
    if (M < 2 || spectrum.N < 1) throw SizeError("global spectrum is empty");
    const Index G = M / 2;
    std::vector<Complex> buf(static_cast<std::size_t>(M), Complex{0.0, 0.0});
    buf[0] = Complex{spectrum.e_hat[0].real(), 0.0};
    for (Index l = 1; l < L; ++l) buf[static_cast<std::size_t>(l % M)] += 2.0 * spectrum.e_hat[static_cast<std::size_t>(l)];
    const auto time = detail::ifft_unscaled(buf);
    ErrorSurface s;
    s.grid_omegas.resize(static_cast<std::size_t>(G));
    s.losses.resize(static_cast<std::size_t>(G));
    const double scale = 1.0 / static_cast<double>(spectrum.N);
    for (Index g = 1; g <= G; ++g) {
        s.grid_omegas[static_cast<std::size_t>(g - 1)] = kTwoPi * static_cast<double>(g) / static_cast<double>(M);
        s.losses[static_cast<std::size_t>(g - 1)] = offset + scale * time[static_cast<std::size_t>(g)].real();
    }
    return s;
}

/// Local spectra of the per-t losses of frequency i, rows t = 1..T-1.
[[nodiscard]] inline std::vector<std::vector<Complex>> local_spectra(const Eigen::MatrixXd& x,
                                                                     std::span<const double> omegas,
                                                                     const DecoderParams& decoder, Index i, Index N) {
    const Eigen::MatrixXd table = detail::local_loss_table(x, omegas, decoder, i, N);
    std::vector<std::vector<Complex>> out(static_cast<std::size_t>(table.rows()));
    parallel_for(0, table.rows(), [&](long r) {
        std::vector<double> row(static_cast<std::size_t>(N));
        for (Index n = 0; n < N; ++n) row[static_cast<std::size_t>(n)] = table(r, n);
        out[static_cast<std::size_t>(r)] = local_spectrum(row, 2 * N);
    }, 256);
    return out;
}

/// Rotates the input pair of frequency i by `phase`: the result evaluated at
/// (cos a, sin a) equals the original at (cos(a + phase), sin(a + phase)).
[[nodiscard]] inline DecoderParams rotate_decoder_input(const DecoderParams& decoder, Index m, Index i, double phase) {
    DecoderParams out = decoder;
    auto& w = out.layers.front().weight;
    const Eigen::VectorXd c = w.col(1 + i);
    const Eigen::VectorXd s = w.col(1 + m + i);
    w.col(1 + i) = c * std::cos(phase) + s * std::sin(phase);
    w.col(1 + m + i) = -c * std::sin(phase) + s * std::cos(phase);
    return out;
}

/// Global loss curve of frequency i for a decoder whose pair-i input is rotated
/// by `phase`, including the t = 0 term.
struct PhaseCurve {
    double phase = 0.0;
    ErrorSurface surface;
};

[[nodiscard]] inline std::vector<PhaseCurve> koopman_loss_curves(const Eigen::MatrixXd& x, std::span<const double> omegas,
                                                                 const DecoderParams& decoder, Index i, Index N,
                                                                 int phase_candidates) {
    const Index m = static_cast<Index>(omegas.size());
    const Index T = x.cols();
    if (T < 3) throw SizeError("curve needs at least 3 samples");
    Index n_eff = N;
    if (2 * n_eff * (T - 1) > kMaxCurvePoints) {
        n_eff = std::max<Index>(4, (kMaxCurvePoints / (2 * (T - 1))) / 2 * 2);
        std::cerr << "warning: curve resolution capped, samples per period reduced from " << N << " to " << n_eff << '\n';
    }
    const Index K = 2 * n_eff;
    const auto locals = local_spectra(x, omegas, decoder, i, n_eff);
    std::vector<PhaseCurve> curves;
    for (int p = 0; p < phase_candidates; ++p) {
        const double phase = kTwoPi * static_cast<double>(p) / static_cast<double>(phase_candidates);
        std::vector<std::vector<Complex>> rotated = locals;
        if (p != 0) {
            std::vector<Complex> twiddle(static_cast<std::size_t>(K + 1));
            for (Index q = 0; q <= K; ++q)
                twiddle[static_cast<std::size_t>(q)] = std::polar(1.0, phase * static_cast<double>(q));
            for (auto& row : rotated)
                for (Index q = 0; q <= K; ++q) row[static_cast<std::size_t>(q)] *= twiddle[static_cast<std::size_t>(q)];
        }
        // t = 0: the angle is the rotation itself.
        Eigen::MatrixXd z0(feature_dim(m), 1);
        detail::fill_feature_column(omegas, 0.0, z0.col(0).data());
        z0(1 + i, 0) = std::cos(phase);
        z0(1 + m + i, 0) = std::sin(phase);
        const double offset = (x.col(0) - forward(decoder, z0).col(0)).squaredNorm();
        curves.push_back({phase, global_loss_curve(assemble_global_spectrum(rotated, K, n_eff), offset)});
    }
    return curves;
}

namespace detail {

inline double koopman_loss(const Eigen::MatrixXd& x, std::span<const double> omegas, const DecoderParams& decoder) {
    return (x - forward(decoder, features_on_samples(omegas, x.cols()))).squaredNorm();
}

/// Least-squares weights for a single affine decoder layer (bias folded into the constant feature).
inline DecoderParams solve_affine_decoder(const Eigen::MatrixXd& x, std::span<const double> omegas) {
    DecoderParams p;
    p.layers.push_back(Layer{solve_amplitudes(x, omegas), Eigen::VectorXd::Zero(x.rows()), Activation::identity});
    return p;
}

/// Gauss-Newton on (w_i, phase of pair i) with the decoder fixed. Returns the
/// new frequency and the phase to fold into the decoder.
struct FrequencyPhase {
    double omega = 0.0;
    double phase = 0.0;
    double loss = 0.0;
};

inline FrequencyPhase refine_frequency_decoder(const Eigen::MatrixXd& x, std::span<const double> omegas,
                                               const DecoderParams& decoder, Index i, const FitConfig& cfg) {
    const Index m = static_cast<Index>(omegas.size());
    const Index T = x.cols();
    const double seed = omegas[static_cast<std::size_t>(i)];
    const double window = kTwoPi / static_cast<double>(T);
    auto loss_of = [&](double w, double phase) {
        return (x - forward(decoder, features_with_phase(omegas, T, i, w, phase))).squaredNorm();
    };
    FrequencyPhase cur{seed, 0.0, loss_of(seed, 0.0)};
    for (int step = 0; step < cfg.gd_steps; ++step) {
        const Eigen::MatrixXd z = features_with_phase(omegas, T, i, cur.omega, cur.phase);
        const Eigen::MatrixXd r = x - forward(decoder, z);
        Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(z.rows(), T);
        Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(z.rows(), T);
        for (Index t = 0; t < T; ++t) {
            dp(1 + i, t) = -z(1 + m + i, t);
            dp(1 + m + i, t) = z(1 + i, t);
            dw(1 + i, t) = static_cast<double>(t) * dp(1 + i, t);
            dw(1 + m + i, t) = static_cast<double>(t) * dp(1 + m + i, t);
        }
        const Eigen::MatrixXd jw = jvp(decoder, z, dw);
        const Eigen::MatrixXd jp = jvp(decoder, z, dp);
        Eigen::Matrix2d h;
        h << jw.cwiseProduct(jw).sum(), jw.cwiseProduct(jp).sum(), jw.cwiseProduct(jp).sum(), jp.cwiseProduct(jp).sum();
        const Eigen::Vector2d g(jw.cwiseProduct(r).sum(), jp.cwiseProduct(r).sum());
        h.diagonal() *= 1.0 + 1e-10;
        if (!(h(0, 0) > 0.0) || !(h(1, 1) > 0.0)) break;
        const Eigen::Vector2d delta = h.ldlt().solve(g);
        if (!delta.allFinite()) break;
        double rate = cfg.gd_rate;
        bool accepted = false;
        double moved = 0.0;
        for (int halving = 0; halving <= 20; ++halving, rate *= 0.5) {
            const double w = cur.omega + rate * delta(0);
            if (w <= 0.0 || w > kPi || std::abs(w - seed) > window) continue;
            const double p = cur.phase + rate * delta(1);
            const double l = loss_of(w, p);
            if (l <= cur.loss) {
                moved = w - cur.omega;
                cur = {w, p, l};
                accepted = true;
                break;
            }
        }
        if (!accepted || std::abs(moved) < cfg.gd_tolerance) break;
    }
    return cur;
}

/// Adam on the decoder for `iters` steps; keeps the best iterate seen.
inline double train_decoder(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z, DecoderParams& decoder, int iters,
                            double rate) {
    Adam adam(decoder, rate);
    DecoderParams best = decoder;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int k = 0; k < iters; ++k) {
        const auto sl = squared_loss(decoder, z, x);
        if (sl.value < best_loss) {
            best_loss = sl.value;
            best = decoder;
        }
        adam.step(decoder, sl.grads);
    }
    const double last = (x - forward(decoder, z)).squaredNorm();
    if (last < best_loss) return last;
    decoder = std::move(best);
    return best_loss;
}


inline void predict_koopman_column(const KoopmanModel& model, double time, double* feature, double* out) {
    const double s = (time - model.grid.t0) / model.grid.dt;
    fill_feature_column(model.omegas.values(), s, feature);
    const Index d = feature_dim(model.omegas.size());
    const Eigen::Map<const Eigen::VectorXd> z(feature, d);
    const Eigen::VectorXd y = forward(model.decoder, Eigen::VectorXd(z));
    for (Index l = 0; l < y.size(); ++l) out[l] = y(l);
}

}  // namespace detail

/// f(Omega(w s)) at arbitrary times, s = (time - t0) / dt; each column is computed on its own.
[[nodiscard]] inline Eigen::MatrixXd predict_koopman(const KoopmanModel& model, std::span<const double> times) {
    Eigen::MatrixXd out(model.decoder.output_dim(), static_cast<Index>(times.size()));
    std::vector<double> feature(static_cast<std::size_t>(feature_dim(model.omegas.size())));
    for (Index h = 0; h < out.cols(); ++h)
        detail::predict_koopman_column(model, times[static_cast<std::size_t>(h)], feature.data(), out.col(h).data());
    return out;
}

[[nodiscard]] inline double training_loss_of(const KoopmanModel& model, const TimeSeries& series) {
    const auto times = grid_times(series.grid);
    return (series.values - predict_koopman(model, times)).squaredNorm();
}

/// Alternating fit of frequencies and decoder. Frequencies start from the
/// linear fit; each sweep then, per frequency, takes the argmin of the global
/// loss curves over the phase candidates, refines (w_i, phase) by Gauss-Newton
/// through the decoder and trains the decoder. Every update is kept only if
/// the training loss does not increase.
[[nodiscard]] inline KoopmanModel fit_koopman(const TimeSeries& series, const KoopmanConfig& cfg,
                                              KoopmanTrace* trace = nullptr) {
    cfg.validate();
    series.validate();
    const Eigen::MatrixXd& x = series.values;
    const Index T = x.cols();
    const Index m = cfg.fit.num_frequencies;
    const Index n = x.rows();
    if (feature_dim(m) > T) throw ConditioningError("2m+1 exceeds the number of samples");
    const bool affine = cfg.hidden.empty();

    FitConfig seed_cfg = cfg.fit;
    const auto seed_model = fit_fourier(TimeSeries(x), seed_cfg);
    const std::vector<double> seed_omegas = seed_model.omegas.vector();

    KoopmanModel best;
    double best_loss = std::numeric_limits<double>::infinity();
    const int restarts = affine ? 1 : cfg.restarts;
    for (int restart = 0; restart < restarts; ++restart) {
        Rng rng(cfg.fit.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1));
        std::vector<double> omegas = seed_omegas;
        DecoderParams decoder;
        double loss = 0.0;
        auto train = [&](DecoderParams& d) {
            if (affine) {
                d = detail::solve_affine_decoder(x, omegas);
                return detail::koopman_loss(x, omegas, d);
            }
            return detail::train_decoder(x, detail::features_on_samples(omegas, T), d, cfg.inner_gd_iters,
                                         cfg.learning_rate);
        };
        if (affine) {
            decoder = detail::solve_affine_decoder(x, omegas);
        } else {
            decoder = make_decoder(feature_dim(m), cfg.hidden, n, cfg.activation, rng);
        }
        loss = train(decoder);

        for (int sweep = 0; sweep < cfg.fit.max_sweeps; ++sweep) {
            const double sweep_start = loss;
            for (Index i = 0; i < m; ++i) {
                // Global search over the curve.
                const auto curves = koopman_loss_curves(x, omegas, decoder, i, cfg.samples_per_period, affine ? 1 : cfg.phase_candidates);
                double best_phase = 0.0;
                std::optional<SurfacePoint> pick;
                const double gap = kTwoPi / (4.0 * static_cast<double>(T));
                for (const auto& c : curves) {
                    const auto p = argmin_surface_where(c.surface, [&](double w) {
                        return !detail::too_close(w, omegas, i, gap);
                    });
                    if (p && (!pick || p->loss < pick->loss)) {
                        pick = p;
                        best_phase = c.phase;
                    }
                }
                if (pick) {
                    auto cand_omegas = omegas;
                    cand_omegas[static_cast<std::size_t>(i)] = pick->omega;
                    DecoderParams cand = affine ? detail::solve_affine_decoder(x, cand_omegas)
                                                : rotate_decoder_input(decoder, m, i, best_phase);
                    const double l = detail::koopman_loss(x, cand_omegas, cand);
                    if (l < loss) {
                        omegas = std::move(cand_omegas);
                        decoder = std::move(cand);
                        loss = l;
                    }
                }

                // Local refinement.
                if (affine) {
                    LinearFitState st{omegas, decoder.layers.front().weight};
                    auto cand_omegas = omegas;
                    cand_omegas[static_cast<std::size_t>(i)] = refine_frequency(x, st, i, cfg.fit);
                    if (!detail::too_close(cand_omegas[static_cast<std::size_t>(i)], omegas, i, gap)) {
                        auto cand = detail::solve_affine_decoder(x, cand_omegas);
                        const double l = detail::koopman_loss(x, cand_omegas, cand);
                        if (l <= loss) {
                            omegas = std::move(cand_omegas);
                            decoder = std::move(cand);
                            loss = l;
                        }
                    }
                } else {
                    const auto fp = detail::refine_frequency_decoder(x, omegas, decoder, i, cfg.fit);
                    if (fp.loss <= loss && !detail::too_close(fp.omega, omegas, i, gap)) {
                        omegas[static_cast<std::size_t>(i)] = fp.omega;
                        decoder = rotate_decoder_input(decoder, m, i, fp.phase);
                        loss = detail::koopman_loss(x, omegas, decoder);
                    }
                    DecoderParams trained = decoder;
                    const double l = train(trained);
                    if (l <= loss) {
                        decoder = std::move(trained);
                        loss = l;
                    }
                }
                if (trace) trace->block_losses.push_back(loss);
            }
            if (trace) trace->sweep_losses.push_back(loss);
            if (sweep > 0 && sweep_start - loss <= cfg.fit.convergence_tolerance * sweep_start) break;
        }
        if (trace) trace->restart_losses.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best.omegas = FrequencyVector(omegas);
            best.decoder = decoder;
        }
    }
    best.grid = series.grid;
    best.training_loss = training_loss_of(best, series);
    return best;
}

}  // namespace spectral
