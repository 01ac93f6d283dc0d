#include "srmra/prior.hpp"

#include <algorithm>
#include <cmath>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"

namespace srmra {

PriorSpec PriorSpec::circulant(Vector power_profile) {
    const auto n = power_profile.size();
    require(n >= 1, "power profile is empty");
    require(power_profile.allFinite() && (power_profile.array() > 0.0).all(),
            "power profile entries must be strictly positive");
    for (Eigen::Index k = 1; k < n; ++k) {
        const double a = power_profile[k];
        const double b = power_profile[n - k];
        require(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)),
                "power profile must satisfy profile[k] == profile[M-k]");
    }
    return PriorSpec(Circulant{std::move(power_profile)});
}

PriorSpec PriorSpec::dense(Matrix precision) {
    require(precision.rows() >= 1 && precision.rows() == precision.cols(), "precision must be square");
    require(precision.allFinite(), "precision entries must be finite");
    const double scale = std::max(1.0, precision.cwiseAbs().maxCoeff());
    require((precision - precision.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "precision must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(precision, Eigen::EigenvaluesOnly);
    require(eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0,
            "precision must be positive definite");
    return PriorSpec(Dense{std::move(precision)});
}

int PriorSpec::dimension() const {
    return std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Circulant>) {
                return static_cast<int>(f.power_profile.size());
            } else {
                return static_cast<int>(f.precision.rows());
            }
        },
        form_);
}

const Vector& PriorSpec::power_profile() const {
    const auto* c = std::get_if<Circulant>(&form_);
    require(c != nullptr, "prior is not circulant");
    return c->power_profile;
}

Matrix PriorSpec::precision_matrix() const {
    if (const auto* d = std::get_if<Dense>(&form_)) {
        return d->precision;
    }
    // First column of the circulant precision: inverse DFT of 1/lambda.
    const Vector& profile = std::get<Circulant>(form_).power_profile;
    const auto n = profile.size();
    const CVector inv = profile.cwiseInverse().cast<Complex>();
    const Vector column = idft_real(inv);
    Matrix precision(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            precision(i, j) = column[wrap_index(i - j, n)];
        }
    }
    return 0.5 * (precision + precision.transpose());
}

Vector inverse_frequency_profile(int M) {
    require(M >= 1, "M must be positive");
    Vector profile(M);
    for (int f = 0; f < M; ++f) {
        const int folded = std::min(f, M - f);
        profile[f] = 1.0 / std::max(1, folded);
    }
    return profile * (M / profile.sum());
}

Vector flat_profile(int M) {
    require(M >= 1, "M must be positive");
    return Vector::Ones(M);
}

HighResSignal sample_prior(const PriorSpec& prior, int M, Rng& rng, Normalize normalize) {
    require(prior.dimension() == M, "prior dimension differs from M");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector white(M);
    for (int i = 0; i < M; ++i) {
        white[i] = gauss(rng);
    }
    Vector values;
    if (prior.is_circulant()) {
        // Sigma^{1/2} is circulant with eigenvalues sqrt(lambda_k).
        CVector spectrum = dft(white);
        spectrum.array() *= prior.power_profile().array().sqrt().cast<Complex>();
        values = idft_real(spectrum);
    } else {
        Eigen::LLT<Matrix> chol(prior.precision_matrix());
        if (chol.info() != Eigen::Success) {
            throw NumericalError("precision is not positive definite");
        }
        // precision = U^T U, x = U^{-1} g has covariance precision^{-1}.
        values = chol.matrixU().solve(white);
    }
    if (normalize == Normalize::yes) {
        values = normalize_energy(values);
    }
    return HighResSignal(std::move(values));
}

}  // namespace srmra
