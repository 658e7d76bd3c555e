#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace spectral;

namespace {

std::vector<double> random_signal(Rng& rng, Index T) {
    std::vector<double> s(static_cast<std::size_t>(T));
    for (double& v : s) v = rng.normal();
    return s;
}

}  // namespace

TEST(RealDft, Impulse) {
    const std::vector<double> s = {1, 0, 0, 0};
    const auto c = real_dft(s);
    ASSERT_EQ(c.coefficients.size(), 3u);
    for (const auto& v : c.coefficients) {
        EXPECT_NEAR(v.real(), 1.0, 1e-15);
        EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    }
}

TEST(RealDft, Constant) {
    const std::vector<double> s = {1, 1, 1, 1};
    const auto c = real_dft(s);
    EXPECT_NEAR(std::abs(c.coefficients[0] - Complex{4.0, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c.coefficients[1]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c.coefficients[2]), 0.0, 1e-15);
}

TEST(RealDft, SingleTone) {
    std::vector<double> s(32);
    for (int t = 0; t < 32; ++t) s[t] = std::cos(kTwoPi * 3.0 * t / 32.0);
    const auto c = real_dft(s);
    for (std::size_t b = 0; b < c.coefficients.size(); ++b)
        EXPECT_NEAR(std::abs(c.coefficients[b]), b == 3 ? 16.0 : 0.0, 1e-9);
}

TEST(RealDft, MatchesDirectDftForCompositeAndPrimeLengths) {
    Rng rng(1);
    for (Index T : {2, 7, 64, 127, 128, 210}) {
        const auto s = random_signal(rng, T);
        const auto c = real_dft(s);
        const auto ref = oracle::direct_dft(s);
        ASSERT_EQ(static_cast<Index>(c.coefficients.size()), T / 2 + 1);
        EXPECT_EQ(c.source_length, T);
        for (std::size_t b = 0; b < c.coefficients.size(); ++b)
            EXPECT_NEAR(std::abs(c.coefficients[b] - ref[b]), 0.0, 1e-9 * std::sqrt(static_cast<double>(T)));
    }
}

TEST(RealDft, RealEdgesAndParseval) {
    Rng rng(2);
    for (Index T : {9, 16, 101}) {
        const auto s = random_signal(rng, T);
        const auto c = real_dft(s).coefficients;
        EXPECT_EQ(c.front().imag(), 0.0);
        if (T % 2 == 0) EXPECT_EQ(c.back().imag(), 0.0);
        double energy = 0.0;
        for (double v : s) energy += v * v;
        double spec = std::norm(c[0]);
        for (Index b = 1; b < static_cast<Index>(c.size()); ++b)
            spec += (T % 2 == 0 && b == T / 2 ? 1.0 : 2.0) * std::norm(c[static_cast<std::size_t>(b)]);
        EXPECT_NEAR(spec / static_cast<double>(T), energy, 1e-9 * energy);
    }
}

TEST(RealDft, Linearity) {
    Rng rng(3);
    const auto u = random_signal(rng, 50);
    const auto v = random_signal(rng, 50);
    std::vector<double> w(50);
    for (int t = 0; t < 50; ++t) w[t] = 2.5 * u[t] - 0.75 * v[t];
    const auto cu = real_dft(u).coefficients, cv = real_dft(v).coefficients, cw = real_dft(w).coefficients;
    for (std::size_t b = 0; b < cw.size(); ++b) {
        const Complex expect = 2.5 * cu[b] - 0.75 * cv[b];
        EXPECT_LE(std::abs(cw[b] - expect), 1e-9 * std::max(1.0, std::abs(expect)));
    }
}

TEST(RealDft, TooShort) {
    const std::vector<double> s = {1.0};
    EXPECT_THROW((void)real_dft(s), SizeError);
}

TEST(Residual, ZeroModelAndExclusion) {
    Rng rng(4);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 30);
    const std::vector<double> w = {0.4};
    EXPECT_TRUE(residual(x, Eigen::MatrixXd::Zero(2, 3), w, std::nullopt).isApprox(x));

    Eigen::MatrixXd a(2, 3);
    a << 0.5, 1.0, -2.0, -1.0, 0.3, 0.7;
    const Eigen::MatrixXd r = residual(x, a, w, Index{0});
    for (Index t = 0; t < 30; ++t)
        for (Index l = 0; l < 2; ++l) EXPECT_NEAR(r(l, t), x(l, t) - a(l, 0), 1e-15);
}

TEST(Residual, ExactModelLeavesExcludedContribution) {
    const std::vector<double> w = {0.3, 1.1};
    Eigen::MatrixXd a(1, 5);
    a << 0.2, 1.5, -0.4, 0.8, 2.0;
    const Eigen::MatrixXd x = a * detail::features_on_samples(w, 40);
    const Eigen::MatrixXd r = residual(x, a, w, Index{0});
    for (Index t = 0; t < 40; ++t)
        EXPECT_NEAR(r(0, t), 1.5 * std::cos(0.3 * t) + 0.8 * std::sin(0.3 * t), 1e-12);
}

TEST(Residual, DimensionMismatch) {
    const std::vector<double> w = {0.3};
    EXPECT_THROW((void)residual(Eigen::MatrixXd::Zero(2, 10), Eigen::MatrixXd::Zero(2, 4), w, std::nullopt), DimensionError);
    EXPECT_THROW((void)residual(Eigen::MatrixXd::Zero(2, 10), Eigen::MatrixXd::Zero(2, 3), w, Index{1}), DimensionError);
}

TEST(ErrorSurface, ZeroResidual) {
    const auto s = error_surface_linear(Eigen::MatrixXd::Zero(1, 16));
    for (double v : s.losses) EXPECT_EQ(v, 0.0);
}

TEST(ErrorSurface, OnGridTone) {
    Eigen::MatrixXd r(1, 64);
    for (int t = 0; t < 64; ++t) r(0, t) = std::cos(kTwoPi * 5.0 * t / 64.0);
    const auto s = error_surface_linear(r);
    ASSERT_EQ(s.size(), 31u);
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_NEAR(s.grid_omegas[k], kTwoPi * static_cast<double>(k + 1) / 64.0, 1e-15);
        EXPECT_NEAR(s.losses[k], k + 1 == 5 ? 0.0 : 32.0, 1e-9);
    }
    const auto best = argmin_surface(s);
    EXPECT_DOUBLE_EQ(best.omega, kTwoPi * 5.0 / 64.0);
}

TEST(ErrorSurface, MatchesPairLeastSquares) {
    Rng rng(5);
    for (Index T : {128, 127, 20}) {
        Eigen::MatrixXd r(2, T);
        for (Index t = 0; t < T; ++t)
            for (Index l = 0; l < 2; ++l) r(l, t) = rng.normal();
        const auto s = error_surface_linear(r);
        ASSERT_EQ(static_cast<Index>(s.size()), surface_bin_count(T));
        const double total = r.squaredNorm();
        for (std::size_t k = 0; k < s.size(); ++k) {
            EXPECT_LE(oracle::relative_error(s.losses[k], oracle::pair_least_squares(r, s.grid_omegas[k])), 1e-6);
            EXPECT_LE(s.losses[k], total * (1 + 1e-9));
            EXPECT_GE(s.losses[k], -1e-9 * total);
        }
        for (std::size_t k = 1; k < s.size(); ++k) EXPECT_GT(s.grid_omegas[k], s.grid_omegas[k - 1]);
        EXPECT_GT(s.grid_omegas.front(), 0.0);
        EXPECT_LE(s.grid_omegas.back(), kPi);
    }
}

TEST(ErrorSurface, ShiftInvariantAtBins) {
    // Indexing time from 1 instead of 0 rotates every coefficient by a unit phase.
    Rng rng(6);
    Eigen::MatrixXd r(1, 33);
    for (Index t = 0; t < 33; ++t) r(0, t) = rng.normal();
    const auto a = error_surface_linear(r);
    for (std::size_t k = 0; k < a.size(); ++k) {
        double re = 0.0, im = 0.0;
        for (Index t = 1; t <= 33; ++t) {
            re += r(0, t - 1) * std::cos(a.grid_omegas[k] * t);
            im += r(0, t - 1) * std::sin(a.grid_omegas[k] * t);
        }
        const double from_shifted = r.squaredNorm() - 2.0 / 33.0 * (re * re + im * im);
        EXPECT_NEAR(a.losses[k], from_shifted, 1e-9 * r.squaredNorm());
    }
}

TEST(ErrorSurface, TooShort) { EXPECT_THROW((void)error_surface_linear(Eigen::MatrixXd::Zero(1, 3)), SizeError); }

TEST(ArgminSurface, PicksSmallestAndBreaksTiesLow) {
    ErrorSurface s;
    s.grid_omegas = {0.1, 0.2, 0.3};
    s.losses = {3, 1, 2};
    auto b = argmin_surface(s);
    EXPECT_DOUBLE_EQ(b.omega, 0.2);
    EXPECT_DOUBLE_EQ(b.loss, 1.0);
    s.losses = {2, 1, 1};
    EXPECT_DOUBLE_EQ(argmin_surface(s).omega, 0.2);
    s.losses = {1, 5, 1};
    EXPECT_DOUBLE_EQ(argmin_surface(s).omega, 0.1);
    EXPECT_THROW((void)argmin_surface(ErrorSurface{}), SizeError);
}

TEST(ErrorSurface, TrueBinWinsAtSnr10) {
    Rng rng(7);
    const Index T = 256;
    const double sigma = 0.1;  // amplitude / sigma = 10
    int hits = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::MatrixXd r(1, T);
        const double phase = rng.uniform(0.0, kTwoPi);
        for (Index t = 0; t < T; ++t) r(0, t) = std::cos(kTwoPi * 17.0 * t / T + phase) + sigma * rng.normal();
        if (std::abs(argmin_surface(error_surface_linear(r)).omega - kTwoPi * 17.0 / T) < 1e-12) ++hits;
    }
    EXPECT_GE(hits, 195);
}
