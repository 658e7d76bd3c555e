#pragma once

// Shared synthetic inputs for unit and acceptance tests.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "spectral/spectral.hpp"

namespace fixture {

using spectral::Index;

struct DriftingTone {
    Eigen::MatrixXd clean;
    Eigen::MatrixXd noisy;
    std::vector<double> phase;
};

/// cos(w t + phi_t) with phi a Gaussian random walk, plus white observation noise.
inline DriftingTone drifting_tone(Index T, double omega, double step_sd, double noise_sd, std::uint64_t seed) {
    spectral::Rng rng(seed);
    DriftingTone d{Eigen::MatrixXd(1, T), Eigen::MatrixXd(1, T), std::vector<double>(static_cast<std::size_t>(T))};
    double phi = 0.0;
    for (Index t = 0; t < T; ++t) {
        if (t > 0) phi += step_sd * rng.normal();
        d.phase[static_cast<std::size_t>(t)] = phi;
        d.clean(0, t) = std::cos(omega * static_cast<double>(t) + phi);
        d.noisy(0, t) = d.clean(0, t) + noise_sd * rng.normal();
    }
    return d;
}

inline double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace fixture
