#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <sstream>

#include "fixtures.hpp"

using namespace spectral;

namespace {

Eigen::MatrixXd awkward_values(Index n, Index T, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(n, T);
    for (Index c = 0; c < T; ++c)
        for (Index r = 0; r < n; ++r) m(r, c) = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
    m(0, 0) = 0.1;
    m(0, 1) = -0.0;
    m(0, 2) = std::numeric_limits<double>::denorm_min();
    m(0, 3) = std::numeric_limits<double>::max();
    return m;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

LoadedModel round_trip(const Json& j) { return model_from_json(Json::parse(j.dump(2))); }

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(-2.5e-7), "-2.5e-07");
    Rng rng(1);
    for (int k = 0; k < 10000; ++k) {
        const double v = rng.normal() * std::pow(10.0, rng.uniform(-200.0, 200.0));
        const double back = parse_double(format_double(v));
        EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0);
    }
    EXPECT_THROW((void)parse_double("1.5x"), ParseError);
    EXPECT_THROW((void)parse_double(""), ParseError);
    EXPECT_EQ(parse_double(" 3.25\r"), 3.25);
}

TEST(Csv, RoundTripIsBitwise) {
    const TimeSeries s(awkward_values(3, 40, 2), TimeGrid{-1.5, 0.25, 40});
    std::stringstream ss;
    write_csv(ss, s);
    const auto back = read_csv(ss);
    EXPECT_TRUE(bitwise_equal(back.values, s.values));
    EXPECT_EQ(back.grid.t0, s.grid.t0);
    EXPECT_EQ(back.grid.dt, s.grid.dt);
    EXPECT_EQ(back.grid.count, 40);

    std::stringstream again;
    write_csv(again, back);
    std::stringstream first;
    write_csv(first, s);
    EXPECT_EQ(again.str(), first.str());
}

TEST(Csv, HeaderAndLayout) {
    Eigen::MatrixXd v(2, 3);
    v << 1, 2, 3, 4, 5, 6;
    std::stringstream ss;
    write_csv(ss, TimeSeries(v));
    EXPECT_EQ(ss.str(), "t,x0,x1\n0,1,4\n1,2,5\n2,3,6\n");
}

TEST(Csv, RejectsMalformedInput) {
    const auto parse = [](const std::string& text) {
        std::stringstream ss(text);
        return read_csv(ss);
    };
    EXPECT_THROW((void)parse(""), ParseError);
    EXPECT_THROW((void)parse("time,x0\n0,1\n1,2\n"), ParseError);
    EXPECT_THROW((void)parse("t,x1\n0,1\n1,2\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n0,1\n1,2,3\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n0,1\n1,abc\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n0,1\n1,nan\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n0,1\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n0,1\n1,2\n3,3\n"), ParseError);
    EXPECT_THROW((void)parse("t,x0\n1,1\n0,2\n"), ParseError);
    EXPECT_NO_THROW((void)parse("t,x0\r\n0,1\r\n1,2\r\n"));
    EXPECT_THROW((void)read_csv_file("/nonexistent/dir/file.csv"), ParseError);
}

TEST(ModelJson, FourierRoundTripPredictsBitwise) {
    const auto d = fixture::drifting_tone(300, kTwoPi / 13.7, 0.0, 0.2, 3);
    FitConfig cfg;
    cfg.num_frequencies = 2;
    auto m = fit_fourier(TimeSeries(d.noisy, TimeGrid{2.0, 0.5, 300}), cfg);
    const auto loaded = round_trip(model_to_json(m));
    ASSERT_TRUE(loaded.linear.has_value());
    EXPECT_FALSE(loaded.phase.has_value());
    EXPECT_TRUE(std::ranges::equal(loaded.omegas().values(), m.omegas.values()));
    EXPECT_TRUE(bitwise_equal(loaded.linear->amplitudes, m.amplitudes));
    EXPECT_EQ(loaded.training_loss(), m.training_loss);
    const std::vector<double> times = {2.0, 2.5, 3.3, 151.75, 5000.0};
    EXPECT_TRUE(bitwise_equal(loaded.predict(times), predict_linear(m, times)));
}

TEST(ModelJson, PhaseCorrectedRoundTrip) {
    const auto d = fixture::drifting_tone(200, kTwoPi / 17.0, 0.02, 0.1, 4);
    FitConfig cfg;
    cfg.num_frequencies = 1;
    for (double beta : {1.0, std::numeric_limits<double>::infinity()}) {
        const auto r = fit_fourier_pc(TimeSeries(d.noisy), cfg, beta);
        const auto loaded = round_trip(model_to_json(r.model, r.track));
        ASSERT_TRUE(loaded.phase.has_value());
        EXPECT_EQ(loaded.phase->phi, r.track.phi);
        EXPECT_EQ(loaded.phase->tv_weight, beta);
        const std::vector<double> times = {0.0, 10.5, 199.0, 400.0};
        EXPECT_TRUE(bitwise_equal(loaded.predict(times), predict_pc(r.model, r.track, times)));
    }
}

TEST(ModelJson, KoopmanRoundTripPredictsBitwise) {
    Rng rng(5);
    KoopmanModel m;
    m.omegas = FrequencyVector{0.7, 1.9};
    m.decoder = make_decoder(5, {6, 4}, 2, Activation::tanh, rng);
    m.grid = TimeGrid{0.0, 1.0, 100};
    m.training_loss = 1.25;
    const auto loaded = round_trip(model_to_json(m));
    ASSERT_TRUE(loaded.koopman.has_value());
    const std::vector<double> times = {0.0, 1.5, 99.0, 12345.0};
    EXPECT_TRUE(bitwise_equal(loaded.predict(times), predict_koopman(m, times)));
    EXPECT_EQ(loaded.koopman->decoder.layers.size(), 3u);
    EXPECT_EQ(loaded.koopman->decoder.layers[1].activation, Activation::tanh);
}

TEST(ModelJson, RejectsInvalidModels) {
    EXPECT_THROW((void)model_from_json(Json::parse(R"({"kind":"fourier"})")), ParseError);
    EXPECT_THROW((void)model_from_json(Json::parse(
                     R"({"kind":"spline","t0":0,"dt":1,"training_loss":0,"omegas":[]})")),
                 ParseError);
    EXPECT_THROW((void)model_from_json(Json::parse(
                     R"({"kind":"fourier","t0":0,"dt":1,"training_loss":0,"omegas":[0.5],"amplitudes":[[1,2]]})")),
                 ParseError);
    EXPECT_THROW((void)read_model_file("/nonexistent/model.json"), ParseError);
}
