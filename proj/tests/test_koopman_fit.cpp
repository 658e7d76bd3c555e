#include <gtest/gtest.h>

#include <cstring>
#include <numeric>

#include "oracles.hpp"

using namespace spectral;

namespace {

DecoderParams random_decoder(Index in, const std::vector<Index>& hidden, Index out, std::uint64_t seed) {
    Rng rng(seed);
    auto p = make_decoder(in, hidden, out, Activation::tanh, rng);
    for (auto& l : p.layers)
        for (Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(-0.3, 0.3);
    return p;
}

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
    return m;
}

DecoderParams affine(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
    DecoderParams p;
    p.layers.push_back(Layer{w, b, Activation::identity});
    return p;
}

// C_q = sum_{n=1}^{N} S[n] e^{-j 2 pi n q / N}, written out.
std::vector<std::complex<double>> harmonic_oracle(const std::vector<double>& s) {
    const auto N = static_cast<Index>(s.size());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(2 * N + 1), {0.0, 0.0});
    for (Index q = 0; q <= N / 2; ++q) {
        std::complex<double> acc{0.0, 0.0};
        for (Index n = 1; n <= N; ++n) {
            const double a = -kTwoPi * static_cast<double>(n * q) / static_cast<double>(N);
            acc += s[static_cast<std::size_t>(n - 1)] * std::complex<double>{std::cos(a), std::sin(a)};
        }
        out[static_cast<std::size_t>(q)] = 2 * q == N ? 0.5 * acc : acc;
    }
    return out;
}

KoopmanConfig small_config(Index m, std::vector<Index> hidden) {
    KoopmanConfig k;
    k.fit.num_frequencies = m;
    k.hidden = std::move(hidden);
    k.restarts = 1;
    k.fit.max_sweeps = 3;
    return k;
}

}  // namespace

TEST(KoopmanConfig, Validation) {
    KoopmanConfig k;
    k.restarts = 0;
    EXPECT_THROW(k.validate(), ConfigError);
    k = KoopmanConfig{};
    k.samples_per_period = 2;
    EXPECT_THROW(k.validate(), ConfigError);
    k = KoopmanConfig{};
    k.learning_rate = 0.0;
    EXPECT_THROW(k.validate(), ConfigError);
}

TEST(SampleLocalLoss, ZeroDecoderGivesConstantSamples) {
    const auto dec = affine(Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2));
    Eigen::MatrixXd x(2, 10);
    x.row(0).setConstant(1.5);
    x.row(1).setConstant(-2.0);
    const std::vector<double> w = {0.4};
    for (double v : sample_local_loss(x, w, dec, 0, 7, 16)) EXPECT_DOUBLE_EQ(v, 1.5 * 1.5 + 4.0);
}

TEST(SampleLocalLoss, TrueFrequencyAttainsMinimum) {
    const Index T = 20, t = 8, N = 16;
    const double truth = kTwoPi * 6.0 / (static_cast<double>(N) * t);  // s_6
    Eigen::MatrixXd x(1, T);
    for (Index k = 0; k < T; ++k) x(0, k) = std::cos(truth * static_cast<double>(k));
    Eigen::MatrixXd w(1, 3);
    w << 0.0, 1.0, 0.0;
    const std::vector<double> omegas = {0.3};
    const auto s = sample_local_loss(x, omegas, affine(w, Eigen::VectorXd::Zero(1)), 0, t, N);
    const auto it = std::min_element(s.begin(), s.end());
    EXPECT_NEAR(*it, 0.0, 1e-24);
    EXPECT_EQ(it - s.begin(), 5);
}

TEST(SampleLocalLoss, MatchesDirectEvaluationAndIsPeriodic) {
    const auto x = random_matrix(2, 30, 1);
    const std::vector<double> omegas = {0.3, 1.1};
    const auto dec = random_decoder(5, {8}, 2, 2);
    for (Index i : {0, 1}) {
        for (Index t : {1, 5, 29}) {
            const Index N = 12;
            const auto s = sample_local_loss(x, omegas, dec, i, t, N);
            for (Index n = 1; n <= N; ++n) {
                const double sn = static_cast<double>(n) / N * kTwoPi / static_cast<double>(t);
                auto w = omegas;
                w[static_cast<std::size_t>(i)] = sn;
                const double direct =
                    (x.col(t) - oracle::mlp(dec, oracle::feature_column(w, static_cast<double>(t)))).squaredNorm();
                EXPECT_NEAR(s[static_cast<std::size_t>(n - 1)], direct, 1e-12);
                w[static_cast<std::size_t>(i)] = sn + kTwoPi / static_cast<double>(t);
                const double shifted =
                    (x.col(t) - oracle::mlp(dec, oracle::feature_column(w, static_cast<double>(t)))).squaredNorm();
                EXPECT_NEAR(direct, shifted, 1e-12);
                EXPECT_GE(s[static_cast<std::size_t>(n - 1)], 0.0);
            }
        }
    }
    EXPECT_THROW((void)sample_local_loss(x, omegas, dec, 0, 0, 8), DimensionError);
    EXPECT_THROW((void)sample_local_loss(x, omegas, dec, 2, 3, 8), DimensionError);
    EXPECT_THROW((void)sample_local_loss(x, omegas, dec, 0, 3, 2), ConfigError);
}

TEST(LocalSpectrum, ZeroAndConstant) {
    for (const auto& c : local_spectrum(std::vector<double>(8, 0.0), 16)) EXPECT_EQ(std::abs(c), 0.0);
    const auto s = local_spectrum(std::vector<double>(4, 2.5), 8);
    ASSERT_EQ(s.size(), 9u);
    EXPECT_NEAR(s[0].real(), 10.0, 1e-14);
    EXPECT_EQ(s[0].imag(), 0.0);
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_NEAR(std::abs(s[k]), 0.0, 1e-14);
    EXPECT_THROW((void)local_spectrum(std::vector<double>(4, 1.0), 6), ConfigError);
}

TEST(LocalSpectrum, MatchesHarmonicOracle) {
    Rng rng(3);
    for (Index N : {4, 7, 16, 33, 64}) {
        std::vector<double> s(static_cast<std::size_t>(N));
        for (double& v : s) v = rng.uniform(0.0, 3.0);
        const auto got = local_spectrum(s, 2 * N);
        const auto ref = harmonic_oracle(s);
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t q = 0; q < got.size(); ++q) EXPECT_LE(std::abs(got[q] - ref[q]), 1e-11 * static_cast<double>(N));
        double total = 0.0;
        for (double v : s) total += v;
        EXPECT_NEAR(got[0].real(), total, 1e-11 * total);
    }
}

TEST(LocalSpectrum, InterpolantReproducesSamples) {
    Rng rng(4);
    for (Index N : {8, 9}) {
        std::vector<double> s(static_cast<std::size_t>(N));
        for (double& v : s) v = rng.uniform(0.0, 1.0);
        const auto c = local_spectrum(s, 2 * N);
        for (Index n = 1; n <= N; ++n) {
            const double theta = kTwoPi * static_cast<double>(n) / static_cast<double>(N);
            double v = c[0].real();
            for (Index q = 1; q <= 2 * N; ++q)
                v += 2.0 * (c[static_cast<std::size_t>(q)] * std::polar(1.0, theta * static_cast<double>(q))).real();
            EXPECT_NEAR(v / static_cast<double>(N), s[static_cast<std::size_t>(n - 1)], 1e-12);
        }
    }
}

TEST(LocalSpectrum, SingleToneConcentrates) {
    const Index N = 16;
    std::vector<double> s(N);
    for (Index n = 1; n <= N; ++n) s[static_cast<std::size_t>(n - 1)] = std::cos(kTwoPi * static_cast<double>(n) / N);
    const auto c = local_spectrum(s, 2 * N);
    for (std::size_t q = 0; q < c.size(); ++q) EXPECT_NEAR(std::abs(c[q]), q == 1 ? N / 2.0 : 0.0, 1e-12);
}

TEST(AssembleGlobalSpectrum, SingleLocalIsCopied) {
    std::vector<std::vector<Complex>> locals = {{{1, 0}, {2, 1}, {3, -1}, {4, 0}, {5, 2}}};
    const auto g = assemble_global_spectrum(locals, 4, 2);
    ASSERT_EQ(g.e_hat.size(), 5u);
    for (std::size_t l = 0; l < 5; ++l) EXPECT_EQ(g.e_hat[l], locals[0][l]);
}

TEST(AssembleGlobalSpectrum, MatchesDoubleLoopAndSparsity) {
    const Index T = 3, K = 8;
    std::vector<std::vector<Complex>> locals(T, std::vector<Complex>(K + 1));
    for (Index t = 0; t < T; ++t)
        for (Index k = 0; k <= K; ++k)
            locals[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = Complex(static_cast<double>(t + k), static_cast<double>(t - k));
    const auto g = assemble_global_spectrum(locals, K, 4);
    ASSERT_EQ(static_cast<Index>(g.e_hat.size()), K * T + 1);
    for (Index l = 0; l <= K * T; ++l) {
        Complex ref{0.0, 0.0};
        bool reachable = false;
        for (Index t = 1; t <= T; ++t)
            for (Index k = 0; k <= K; ++k)
                if (t * k == l) {
                    ref += locals[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k)];
                    reachable = true;
                }
        EXPECT_EQ(g.e_hat[static_cast<std::size_t>(l)], ref);
        if (!reachable) EXPECT_EQ(g.e_hat[static_cast<std::size_t>(l)], Complex(0.0, 0.0));
    }
    std::vector<std::vector<Complex>> zero(T, std::vector<Complex>(K + 1));
    for (const auto& v : assemble_global_spectrum(zero, K, 4).e_hat) EXPECT_EQ(v, Complex(0.0, 0.0));
    locals[1].pop_back();
    EXPECT_THROW((void)assemble_global_spectrum(locals, K, 4), DimensionError);
}

TEST(GlobalLossCurve, SingleLocalInterpolatesSamples) {
    Rng rng(5);
    const Index N = 8;
    std::vector<double> s(N);
    for (double& v : s) v = rng.uniform(0.0, 2.0);
    const auto curve = global_loss_curve(assemble_global_spectrum({local_spectrum(s, 2 * N)}, 2 * N, N));
    ASSERT_EQ(curve.size(), static_cast<std::size_t>(N));
    // grid point g is the angle 2 pi g / 2N, i.e. sample n = g / 2.
    for (Index n = 1; n <= N / 2; ++n) EXPECT_NEAR(curve.losses[static_cast<std::size_t>(2 * n - 1)], s[static_cast<std::size_t>(n - 1)], 1e-12);
}

TEST(GlobalLossCurve, MatchesDirectSummation) {
    const Index T = 64, N = 32;
    const auto x = random_matrix(2, T, 6);
    const std::vector<double> omegas = {0.35, 1.3};
    const auto dec = random_decoder(5, {8}, 2, 7);
    for (Index i : {0, 1}) {
        const auto curves = koopman_loss_curves(x, omegas, dec, i, N, 1);
        ASSERT_EQ(curves.size(), 1u);
        const auto& s = curves[0].surface;
        ASSERT_GE(static_cast<Index>(s.size()), N * (T - 1));
        double worst = 0.0;
        for (std::size_t g = 0; g < s.size(); g += 7)
            worst = std::max(worst, oracle::relative_error(s.losses[g], oracle::direct_global_loss(x, omegas, dec, i, s.grid_omegas[g])));
        EXPECT_LE(worst, 1e-6);
    }
}

TEST(GlobalLossCurve, PhaseCandidatesMatchRotatedDecoders) {
    const Index T = 40, N = 32;
    const auto x = random_matrix(1, T, 8);
    const std::vector<double> omegas = {0.5};
    const auto dec = random_decoder(3, {6}, 1, 9);
    const auto curves = koopman_loss_curves(x, omegas, dec, 0, N, 4);
    ASSERT_EQ(curves.size(), 4u);
    for (const auto& c : curves) {
        const auto rotated = rotate_decoder_input(dec, 1, 0, c.phase);
        for (std::size_t g = 3; g < c.surface.size(); g += 37)
            EXPECT_LE(oracle::relative_error(c.surface.losses[g],
                                             oracle::direct_global_loss(x, omegas, rotated, 0, c.surface.grid_omegas[g])),
                      1e-6);
    }
}

TEST(GlobalLossCurve, AffineDecoderValleyHoldsTruth) {
    const Index T = 64;
    const double truth = kTwoPi * 5.3 / T;
    Eigen::MatrixXd x(1, T);
    for (Index t = 0; t < T; ++t) x(0, t) = std::cos(truth * static_cast<double>(t));
    Eigen::MatrixXd w(1, 3);
    w << 0.0, 1.0, 0.0;
    const std::vector<double> omegas = {1.0};
    const auto curves = koopman_loss_curves(x, omegas, affine(w, Eigen::VectorXd::Zero(1)), 0, 16, 1);
    EXPECT_LE(std::abs(argmin_surface(curves[0].surface).omega - truth), kTwoPi / T);
}

TEST(RotateDecoderInput, ShiftsTheAngle) {
    const auto dec = random_decoder(5, {4}, 2, 10);
    const auto rot = rotate_decoder_input(dec, 2, 1, 0.7);
    for (double a : {0.0, 1.0, 2.5}) {
        Eigen::VectorXd z(5), zs(5);
        z << 1.0, 0.2, std::cos(a), -0.4, std::sin(a);
        zs << 1.0, 0.2, std::cos(a + 0.7), -0.4, std::sin(a + 0.7);
        EXPECT_LE((forward(rot, z) - forward(dec, zs)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(FitKoopman, AffineDecoderAgreesWithFourier) {
    const Index T = 256;
    const double truth = kTwoPi * 9.37 / T;
    Eigen::MatrixXd x(1, T);
    for (Index t = 0; t < T; ++t) x(0, t) = 0.5 + 1.2 * std::cos(truth * static_cast<double>(t) + 0.4);
    auto cfg = small_config(1, {});
    const auto k = fit_koopman(TimeSeries(x), cfg);
    const auto f = fit_fourier(TimeSeries(x), cfg.fit);
    EXPECT_NEAR(k.omegas[0], f.omegas[0], 1e-6);
    EXPECT_NEAR(k.omegas[0], truth, 1e-6);
}

TEST(FitKoopman, SquareWavePeriodAndForecast) {
    const Index T = 400;
    const auto data = gen_square_wave(5 * T).series.values;
    auto cfg = small_config(1, {32, 32});
    const auto model = fit_koopman(TimeSeries(Eigen::MatrixXd(data.leftCols(T))), cfg);
    EXPECT_NEAR(model.omegas[0], kPi / 2.0, 1e-3);
    std::vector<double> times(static_cast<std::size_t>(5 * T));
    std::iota(times.begin(), times.end(), 0.0);
    EXPECT_LT(rce(data, predict_koopman(model, times)), 0.05);
}

TEST(FitKoopman, BlockLossesNeverIncrease) {
    Rng rng(11);
    Eigen::MatrixXd x(2, 200);
    for (Index t = 0; t < 200; ++t) {
        const double a = 0.3 * static_cast<double>(t);
        x(0, t) = std::tanh(2.0 * std::cos(a)) + 0.1 * rng.normal();
        x(1, t) = std::sin(a) * std::cos(0.05 * static_cast<double>(t)) + 0.1 * rng.normal();
    }
    auto cfg = small_config(2, {8});
    cfg.inner_gd_iters = 50;
    KoopmanTrace trace;
    const auto model = fit_koopman(TimeSeries(x), cfg, &trace);
    for (std::size_t k = 1; k < trace.block_losses.size(); ++k)
        EXPECT_LE(trace.block_losses[k], trace.block_losses[k - 1] * (1 + 1e-9));
    EXPECT_LE(oracle::relative_error(model.training_loss, trace.restart_losses.front()), 1e-9);
}

TEST(PredictKoopman, ConstantDecoderAndTrainingGrid) {
    KoopmanModel m;
    m.omegas = FrequencyVector{0.7};
    Eigen::VectorXd b(2);
    b << 3.0, -1.0;
    m.decoder = affine(Eigen::MatrixXd::Zero(2, 3), b);
    m.grid = TimeGrid{0.0, 1.0, 10};
    const std::vector<double> times = {0.0, 17.5, 1e6};
    const auto y = predict_koopman(m, times);
    for (Index h = 0; h < 3; ++h) {
        EXPECT_EQ(y(0, h), 3.0);
        EXPECT_EQ(y(1, h), -1.0);
    }

    m.decoder = random_decoder(3, {5}, 2, 12);
    m.grid = TimeGrid{2.0, 0.5, 50};
    const auto x = random_matrix(2, 50, 13);
    const TimeSeries series(x, m.grid);
    const auto fitted = predict_koopman(m, grid_times(m.grid));
    const Eigen::MatrixXd z = detail::features_on_samples(m.omegas.values(), 50);
    EXPECT_LE((fitted - forward(m.decoder, z)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(oracle::relative_error(training_loss_of(m, series), (x - forward(m.decoder, z)).squaredNorm()), 1e-9);
}

TEST(PredictKoopman, ColumnsIndependentOfOtherHorizons) {
    KoopmanModel m;
    m.omegas = FrequencyVector{0.3, 1.9};
    m.decoder = random_decoder(5, {16}, 3, 14);
    m.grid = TimeGrid{0.0, 1.0, 100};
    std::vector<double> times = {5.0, 1234.5, -3.0, 99999.0};
    const auto all = predict_koopman(m, times);
    for (std::size_t h = 0; h < times.size(); ++h) {
        const std::vector<double> one = {times[h]};
        const auto single = predict_koopman(m, one);
        EXPECT_EQ(std::memcmp(single.data(), all.col(static_cast<Index>(h)).data(), 3 * sizeof(double)), 0);
    }
}
