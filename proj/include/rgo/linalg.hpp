#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace rgo {

// Hard cap on the ambient dimension. Rank models go up to d=3 for solves,
// a bit higher for pointwise property checks.
inline constexpr int kMaxDim = 6;

// Stack-allocated dynamic-size vectors/matrices; no heap traffic on the
// hot paths (field evaluation inside SDE steps and quadrature loops).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Symmetric positive semidefinite square root via eigendecomposition.
// Throws if the matrix has an eigenvalue below -tol (not PSD).
inline Mat psd_sqrt(const Mat& a, double tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Vec ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    Vec root(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -tol * scale)
            throw std::runtime_error("psd_sqrt: matrix is not positive semidefinite");
        root[i] = ev[i] > 0 ? std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Orthonormal basis of the zero-sum subspace {z : sum z_i = 0} of R^d,
// returned as the d x (d-1) matrix whose columns are the basis vectors.
// Columns are the Helmert-style vectors, so the basis is deterministic.
inline Mat zero_sum_basis(int d) {
    Mat m = Mat::Zero(d, d - 1);
    for (int k = 0; k < d - 1; ++k) {
        // k-th Helmert vector: (1,...,1,-(k+1),0,...,0)/norm with k+1 leading ones
        const double norm = std::sqrt(double(k + 1) * (k + 2));
        for (int i = 0; i <= k; ++i) m(i, k) = 1.0 / norm;
        m(k + 1, k) = -double(k + 1) / norm;
    }
    return m;
}

// Projector onto the zero-sum subspace: I - 11'/d.
inline Mat zero_sum_projector(int d) {
    return Mat::Identity(d, d) - Mat::Constant(d, d, 1.0 / d);
}

}  // namespace rgo
