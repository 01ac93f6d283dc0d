#pragma once

#include <complex>

#include <Eigen/Dense>

namespace srmra {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Non-negative remainder of `value` modulo `n` (n > 0).
constexpr long long wrap_index(long long value, long long n) {
    const long long r = value % n;
    return r < 0 ? r + n : r;
}

}  // namespace srmra
