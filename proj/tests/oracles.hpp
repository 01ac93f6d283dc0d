#pragma once

// Independent reference implementations used only by the tests. They follow
// the defining formulas directly (dense matrices, double loops, finite
// differences) and never call the fast paths they check.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "srmra/identifiability.hpp"
#include "srmra/invariants.hpp"
#include "srmra/signal.hpp"

namespace oracle {

using srmra::CMatrix;
using srmra::Complex;
using srmra::CVector;
using srmra::Matrix;
using srmra::RowMatrix;
using srmra::Vector;

inline long long wrap(long long v, long long n) {
    return ((v % n) + n) % n;
}

inline CVector naive_dft(const Vector& z) {
    const auto n = z.size();
    CVector out = CVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(wrap(k * m, n)) / n;
            out[k] += z[m] * std::polar(1.0, angle);
        }
    }
    return out;
}

/// 2-D DFT of an n x n real array with the same sign convention.
inline CMatrix naive_dft2(const Matrix& a) {
    const auto n = a.rows();
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index k1 = 0; k1 < n; ++k1) {
        for (Eigen::Index k2 = 0; k2 < n; ++k2) {
            for (Eigen::Index l1 = 0; l1 < n; ++l1) {
                for (Eigen::Index l2 = 0; l2 < n; ++l2) {
                    const double angle =
                        -2.0 * std::numbers::pi * static_cast<double>(wrap(k1 * l1 + k2 * l2, n)) / n;
                    out(k1, k2) += a(l1, l2) * std::polar(1.0, angle);
                }
            }
        }
    }
    return out;
}

/// Dense sampling-after-shift operator T_s = P R_s (L x M).
inline Matrix sampling_operator(int M, int L, int s) {
    const int K = M / L;
    Matrix T = Matrix::Zero(L, M);
    for (int l = 0; l < L; ++l) {
        T(l, wrap(static_cast<long long>(l) * K - s, M)) = 1.0;
    }
    return T;
}

inline RowMatrix naive_residuals(const Vector& x, const RowMatrix& samples, int L) {
    const int M = static_cast<int>(x.size());
    RowMatrix res(samples.rows(), M);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (int s = 0; s < M; ++s) {
            res(i, s) = (samples.row(i).transpose() - sampling_operator(M, L, s) * x).squaredNorm();
        }
    }
    return res;
}

/// Double loop with plain exponentials (no max subtraction); valid for
/// moderate residual/sigma ratios.
inline double naive_log_likelihood(const Vector& x, const RowMatrix& samples, int L, double sigma) {
    const int M = static_cast<int>(x.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        double inner = 0.0;
        for (int s = 0; s < M; ++s) {
            const double r = (samples.row(i).transpose() - sampling_operator(M, L, s) * x).squaredNorm();
            inner += std::exp(-r / (2.0 * sigma * sigma));
        }
        total += std::log(inner / M);
    }
    return total;
}

inline RowMatrix naive_weights(const Vector& x, const RowMatrix& samples, int L, double sigma) {
    const int M = static_cast<int>(x.size());
    RowMatrix w(samples.rows(), M);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        double total = 0.0;
        for (int s = 0; s < M; ++s) {
            const double r = (samples.row(i).transpose() - sampling_operator(M, L, s) * x).squaredNorm();
            w(i, s) = std::exp(-r / (2.0 * sigma * sigma));
            total += w(i, s);
        }
        w.row(i) /= total;
    }
    return w;
}

/// A = P + (1/sigma^2) sum w (P R_s)^T (P R_s), b = (1/sigma^2) sum w (P R_s)^T y.
inline std::pair<Matrix, Vector> dense_m_step(const RowMatrix& w, const RowMatrix& samples, int M, int L, double sigma,
                                              const Matrix& precision) {
    Matrix A = precision;
    Vector b = Vector::Zero(M);
    const double inv = 1.0 / (sigma * sigma);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (int s = 0; s < M; ++s) {
            const Matrix T = sampling_operator(M, L, s);
            A += inv * w(i, s) * T.transpose() * T;
            b += inv * w(i, s) * T.transpose() * samples.row(i).transpose();
        }
    }
    return {A, b};
}

/// Central finite-difference Jacobian of the mixed moment map.
inline Matrix finite_difference_jacobian(const std::vector<Vector>& subs) {
    const int K = static_cast<int>(subs.size());
    const int L = static_cast<int>(subs.front().size());
    const Vector x0 = srmra::flatten(subs);
    const auto coords = [&](const Vector& p) {
        return srmra::invariant_coordinates(srmra::mixed_invariants(srmra::unflatten(p, K, L)));
    };
    const Eigen::Index rows = coords(x0).size();
    Matrix J(rows, x0.size());
    for (Eigen::Index j = 0; j < x0.size(); ++j) {
        const double h = 1e-5 * (1.0 + std::abs(x0[j]));
        Vector plus = x0;
        Vector minus = x0;
        plus[j] += h;
        minus[j] -= h;
        J.col(j) = (coords(plus) - coords(minus)) / (2.0 * h);
    }
    return J;
}

inline int svd_rank(const Matrix& J, double tol) {
    Eigen::JacobiSVD<Matrix> svd(J);
    const Vector sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        rank += sv[i] > tol * sv[0] ? 1 : 0;
    }
    return rank;
}

/// min over cyclic shifts of ||R_l a - b|| / ||b|| by enumeration.
inline double brute_relative_error(const Vector& a, const Vector& b) {
    double best = INFINITY;
    for (Eigen::Index l = 0; l < a.size(); ++l) {
        best = std::min(best, (srmra::circular_shift(a, l) - b).norm() / b.norm());
    }
    return best;
}

inline Vector gaussian_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = g(rng);
    }
    return v;
}

}  // namespace oracle
