#pragma once

// CSV datasets and JSON model files.
//
// CSV: header `t,x0,...,x{n-1}`, one row per sample, equidistant t, numbers
// written in shortest round-trip form.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spectral/decoder.hpp"
#include "spectral/errors.hpp"
#include "spectral/fourier_fit.hpp"
#include "spectral/koopman_fit.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/phase_correction.hpp"

namespace spectral {

using Json = nlohmann::json;

/// Shortest decimal that parses back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

/// Columns at explicit times, written as CSV rows.
inline void write_csv(std::ostream& os, const Eigen::MatrixXd& values, std::span<const double> times) {
    if (static_cast<Index>(times.size()) != values.cols()) throw DimensionError("time count differs from column count");
    os << 't';
    for (Index l = 0; l < values.rows(); ++l) os << ",x" << l;
    os << '\n';
    for (Index k = 0; k < values.cols(); ++k) {
        os << format_double(times[static_cast<std::size_t>(k)]);
        for (Index l = 0; l < values.rows(); ++l) os << ',' << format_double(values(l, k));
        os << '\n';
    }
}

inline void write_csv(std::ostream& os, const TimeSeries& series) {
    const auto times = grid_times(series.grid);
    write_csv(os, series.values, times);
}

inline void write_csv_file(const std::string& path, const TimeSeries& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(f, series);
}

/// Raw CSV contents without the equidistance check.
struct CsvTable {
    std::vector<double> times;
    Eigen::MatrixXd values;  // n x T
};

[[nodiscard]] inline CsvTable read_csv_table(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty dataset");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "t") throw ParseError("header must be t,x0,...");
    for (std::size_t k = 1; k < header.size(); ++k)
        if (header[k] != "x" + std::to_string(k - 1)) throw ParseError("unexpected header column '" + header[k] + "'");
    const std::size_t n = header.size() - 1;
    std::vector<double> times;
    std::vector<double> data;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t start = 0;
        std::size_t col = 0;
        while (true) {
            const auto end = line.find(',', start);
            const std::string_view cell(line.data() + start, (end == std::string::npos ? line.size() : end) - start);
            double v;
            try {
                v = parse_double(cell);
            } catch (const ParseError& e) {
                throw ParseError("row " + std::to_string(row) + ": " + e.what());
            }
            if (!std::isfinite(v)) throw ParseError("row " + std::to_string(row) + ": non-finite value");
            if (col == 0) times.push_back(v);
            else data.push_back(v);
            ++col;
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (col != n + 1) throw ParseError("row " + std::to_string(row) + " has " + std::to_string(col) + " fields");
    }
    CsvTable t;
    t.times = std::move(times);
    const Index T = static_cast<Index>(t.times.size());
    t.values.resize(static_cast<Index>(n), T);
    for (Index k = 0; k < T; ++k)
        for (Index l = 0; l < static_cast<Index>(n); ++l)
            t.values(l, k) = data[static_cast<std::size_t>(k) * n + static_cast<std::size_t>(l)];
    return t;
}

[[nodiscard]] inline CsvTable read_csv_table_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open '" + path + "'");
    return read_csv_table(f);
}

/// Dataset with an equidistant time column.
[[nodiscard]] inline TimeSeries read_csv(std::istream& is) {
    auto t = read_csv_table(is);
    const Index T = static_cast<Index>(t.times.size());
    if (T < 2) throw ParseError("dataset needs at least 2 rows");
    const double t0 = t.times.front();
    const double dt = (t.times.back() - t0) / static_cast<double>(T - 1);
    if (!(dt > 0.0)) throw ParseError("time column must be strictly increasing");
    for (Index k = 0; k < T; ++k) {
        const double expect = t0 + static_cast<double>(k) * dt;
        if (std::abs(t.times[static_cast<std::size_t>(k)] - expect) > 1e-6 * dt)
            throw ParseError("time column is not equidistant at row " + std::to_string(k + 2));
    }
    // A step that reproduces the written grid exactly when there is one.
    const double dt1 = t.times[1] - t0;
    bool exact = true;
    for (Index k = 0; k < T && exact; ++k) exact = t0 + static_cast<double>(k) * dt1 == t.times[static_cast<std::size_t>(k)];
    return TimeSeries(std::move(t.values), TimeGrid{t0, exact ? dt1 : dt, T});
}

[[nodiscard]] inline TimeSeries read_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open '" + path + "'");
    return read_csv(f);
}

// Model JSON.

namespace detail {

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("expected a non-empty matrix");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (!j[static_cast<std::size_t>(r)].is_array() || static_cast<Index>(j[static_cast<std::size_t>(r)].size()) != cols)
            throw ParseError("ragged matrix");
        for (Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline Json grid_fields(Json j, const TimeGrid& g, double loss) {
    j["t0"] = g.t0;
    j["dt"] = g.dt;
    j["training_loss"] = loss;
    return j;
}

}  // namespace detail

[[nodiscard]] inline Json decoder_to_json(const DecoderParams& d) {
    Json layers = Json::array();
    for (const auto& l : d.layers) {
        Json b = Json::array();
        for (Index k = 0; k < l.bias.size(); ++k) b.push_back(l.bias(k));
        layers.push_back({{"w", detail::matrix_to_json(l.weight)}, {"b", b}, {"act", std::string(to_string(l.activation))}});
    }
    return Json{{"layers", layers}};
}

[[nodiscard]] inline DecoderParams decoder_from_json(const Json& j) {
    DecoderParams d;
    for (const auto& lj : j.at("layers")) {
        Layer l;
        l.weight = detail::matrix_from_json(lj.at("w"));
        const auto& b = lj.at("b");
        l.bias.resize(static_cast<Index>(b.size()));
        for (std::size_t k = 0; k < b.size(); ++k) l.bias(static_cast<Index>(k)) = b[k].get<double>();
        l.activation = activation_from_string(lj.at("act").get<std::string>());
        d.layers.push_back(std::move(l));
    }
    d.validate();
    return d;
}

[[nodiscard]] inline Json model_to_json(const LinearOscillatorModel& m) {
    Json j{{"kind", "fourier"}, {"omegas", m.omegas.vector()}, {"amplitudes", detail::matrix_to_json(m.amplitudes)}};
    return detail::grid_fields(std::move(j), m.grid, m.training_loss);
}

[[nodiscard]] inline Json model_to_json(const LinearOscillatorModel& m, const PhaseTrack& track) {
    Json j = model_to_json(m);
    j["phi"] = track.phi;
    if (std::isinf(track.tv_weight)) j["tv_weight"] = "inf";
    else j["tv_weight"] = track.tv_weight;
    return j;
}

[[nodiscard]] inline Json model_to_json(const KoopmanModel& m) {
    Json j{{"kind", "koopman"}, {"omegas", m.omegas.vector()}, {"decoder", decoder_to_json(m.decoder)}};
    return detail::grid_fields(std::move(j), m.grid, m.training_loss);
}

/// Any model file: a linear model (optionally phase corrected) or a Koopman model.
struct LoadedModel {
    std::optional<LinearOscillatorModel> linear;
    std::optional<PhaseTrack> phase;
    std::optional<KoopmanModel> koopman;

    [[nodiscard]] Eigen::MatrixXd predict(std::span<const double> times) const {
        if (koopman) return predict_koopman(*koopman, times);
        if (phase) return predict_pc(*linear, *phase, times);
        return predict_linear(*linear, times);
    }

    [[nodiscard]] const FrequencyVector& omegas() const { return koopman ? koopman->omegas : linear->omegas; }
    [[nodiscard]] const TimeGrid& grid() const { return koopman ? koopman->grid : linear->grid; }
    [[nodiscard]] double training_loss() const { return koopman ? koopman->training_loss : linear->training_loss; }
};

[[nodiscard]] inline LoadedModel model_from_json(const Json& j) {
    try {
        LoadedModel out;
        const auto kind = j.at("kind").get<std::string>();
        TimeGrid grid{j.at("t0").get<double>(), j.at("dt").get<double>(), 2};
        const double loss = j.at("training_loss").get<double>();
        FrequencyVector omegas(j.at("omegas").get<std::vector<double>>());
        if (kind == "fourier") {
            LinearOscillatorModel m;
            m.omegas = std::move(omegas);
            m.amplitudes = detail::matrix_from_json(j.at("amplitudes"));
            if (m.amplitudes.cols() != feature_dim(m.omegas.size())) throw ParseError("amplitude width must be 2m+1");
            m.grid = grid;
            m.training_loss = loss;
            if (j.contains("phi")) {
                PhaseTrack p;
                p.phi = j.at("phi").get<std::vector<double>>();
                const auto& w = j.at("tv_weight");
                p.tv_weight = w.is_string() ? std::numeric_limits<double>::infinity() : w.get<double>();
                m.grid.count = static_cast<Index>(p.phi.size());
                out.phase = std::move(p);
            }
            out.linear = std::move(m);
        } else if (kind == "koopman") {
            KoopmanModel m;
            m.omegas = std::move(omegas);
            m.decoder = decoder_from_json(j.at("decoder"));
            if (m.decoder.input_dim() != feature_dim(m.omegas.size())) throw ParseError("decoder input must be 2m+1");
            m.grid = grid;
            m.training_loss = loss;
            out.koopman = std::move(m);
        } else {
            throw ParseError("unknown model kind '" + kind + "'");
        }
        return out;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
}

[[nodiscard]] inline LoadedModel read_model_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    try {
        return model_from_json(Json::parse(f));
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << j.dump(2) << '\n';
}

}  // namespace spectral
