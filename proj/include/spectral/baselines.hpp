#pragma once

// PCA reduction and (forward-backward) dynamic mode decomposition.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"

namespace spectral {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct PCABasis {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // n x r, orthonormal columns
    Eigen::VectorXd singular_values;  // all of them, descending

    [[nodiscard]] Index rank() const { return components.cols(); }
};

struct DMDModel {
    ComplexVector eigenvalues;
    ComplexMatrix modes;  // r_state x rank
    ComplexVector amplitudes;
    Index rank = 0;
    /// Set when the backward operator was singular and the forward fit was used.
    bool fell_back_to_forward = false;
};

/// Singular values below max * kPinvTolerance are discarded.
inline constexpr double kPinvTolerance = 1e-10;

[[nodiscard]] inline PCABasis pca_fit(const Eigen::MatrixXd& x, Index r) {
    if (r < 1 || r > std::min(x.rows(), x.cols())) throw ConfigError("PCA rank out of range");
    PCABasis b;
    b.mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - b.mean;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    b.components = svd.matrixU().leftCols(r);
    b.singular_values = svd.singularValues();
    return b;
}

[[nodiscard]] inline Eigen::MatrixXd pca_project(const PCABasis& basis, const Eigen::MatrixXd& x) {
    if (x.rows() != basis.mean.size()) throw DimensionError("data dimension differs from PCA basis");
    return basis.components.transpose() * (x.colwise() - basis.mean);
}

[[nodiscard]] inline Eigen::MatrixXd pca_reconstruct(const PCABasis& basis, const Eigen::MatrixXd& reduced) {
    if (reduced.rows() != basis.rank()) throw DimensionError("reduced dimension differs from PCA rank");
    return (basis.components * reduced).colwise() + basis.mean;
}

/// ||x - reconstruct(project(x))||_F^2 / ||x||_F^2.
[[nodiscard]] inline double pca_relative_error(const PCABasis& basis, const Eigen::MatrixXd& x) {
    const double denom = x.squaredNorm();
    if (!(denom > 0.0)) throw DegenerateInputError("zero-energy data");
    return (x - pca_reconstruct(basis, pca_project(basis, x))).squaredNorm() / denom;
}

namespace detail {

struct ReducedPair {
    Eigen::MatrixXd u;      // projection basis (state x rank)
    Eigen::MatrixXd x1, x2;  // reduced snapshots
};

/// Truncated POD basis of Z1 and both snapshot sets in its coordinates.
inline ReducedPair reduce_pair(const Eigen::MatrixXd& z) {
    if (z.cols() < 2) throw SizeError("DMD needs at least 2 snapshots");
    const Eigen::MatrixXd z1 = z.leftCols(z.cols() - 1);
    const Eigen::MatrixXd z2 = z.rightCols(z.cols() - 1);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(z1, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Index rank = 0;
    const double cut = s.size() ? s(0) * kPinvTolerance : 0.0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    if (rank == 0) throw DegenerateInputError("snapshot matrix is zero");
    ReducedPair p;
    p.u = svd.matrixU().leftCols(rank);
    p.x1 = p.u.transpose() * z1;
    p.x2 = p.u.transpose() * z2;
    return p;
}

/// a * pinv(b) with the relative truncation tolerance.
inline Eigen::MatrixXd times_pinv(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cut = s.size() ? s(0) * kPinvTolerance : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Index k = 0; k < s.size(); ++k)
        if (s(k) > cut) inv(k) = 1.0 / s(k);
    return a * svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline DMDModel modal_model(const Eigen::MatrixXd& u, const ComplexMatrix& op, const Eigen::VectorXd& z0) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(op);
    if (es.info() != Eigen::Success) throw ConditioningError("DMD eigendecomposition failed");
    DMDModel m;
    m.eigenvalues = es.eigenvalues();
    m.modes = u.cast<std::complex<double>>() * es.eigenvectors();
    m.rank = u.cols();
    const ComplexVector rhs = z0.cast<std::complex<double>>();
    m.amplitudes = m.modes.colPivHouseholderQr().solve(rhs);
    return m;
}

}  // namespace detail

/// Projected DMD: Z2 = A Z1 solved by the truncated pseudo-inverse in the POD basis of Z1.
[[nodiscard]] inline DMDModel dmd_fit(const Eigen::MatrixXd& z) {
    const auto p = detail::reduce_pair(z);
    const Eigen::MatrixXd a = detail::times_pinv(p.x2, p.x1);
    return detail::modal_model(p.u, a.cast<std::complex<double>>(), z.col(0));
}

/// Forward-backward DMD: principal square root of A_f A_b^{-1}.
[[nodiscard]] inline DMDModel fb_dmd_fit(const Eigen::MatrixXd& z) {
    const auto p = detail::reduce_pair(z);
    const Eigen::MatrixXd af = detail::times_pinv(p.x2, p.x1);
    const Eigen::MatrixXd ab = detail::times_pinv(p.x1, p.x2);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ab);
    lu.setThreshold(kPinvTolerance);
    if (!lu.isInvertible()) {
        auto m = detail::modal_model(p.u, af.cast<std::complex<double>>(), z.col(0));
        m.fell_back_to_forward = true;
        return m;
    }
    const Eigen::MatrixXd prod = af * lu.inverse();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(prod.cast<std::complex<double>>());
    if (es.info() != Eigen::Success) throw ConditioningError("FB-DMD eigendecomposition failed");
    const ComplexVector root = es.eigenvalues().cwiseSqrt();
    const ComplexMatrix v = es.eigenvectors();
    Eigen::FullPivLU<ComplexMatrix> vlu(v);
    if (!vlu.isInvertible()) {
        auto m = detail::modal_model(p.u, af.cast<std::complex<double>>(), z.col(0));
        m.fell_back_to_forward = true;
        return m;
    }
    const ComplexMatrix op = v * root.asDiagonal() * vlu.inverse();
    return detail::modal_model(p.u, op, z.col(0));
}

/// Re sum_k modes_k b_k lambda_k^s at step offsets s from the first training snapshot.
[[nodiscard]] inline Eigen::MatrixXd dmd_predict(const DMDModel& model, std::span<const double> steps) {
    Eigen::MatrixXd out(model.modes.rows(), static_cast<Index>(steps.size()));
    for (Index h = 0; h < out.cols(); ++h) {
        const double s = steps[static_cast<std::size_t>(h)];
        ComplexVector coef(model.eigenvalues.size());
        for (Index k = 0; k < coef.size(); ++k) {
            const auto lambda = model.eigenvalues(k);
            const auto power = s == 0.0 ? std::complex<double>(1.0, 0.0)
                               : std::abs(lambda) == 0.0 ? std::complex<double>(0.0, 0.0)
                                                         : std::pow(lambda, s);
            coef(k) = model.amplitudes(k) * power;
        }
        out.col(h) = (model.modes * coef).real();
    }
    return out;
}

}  // namespace spectral
