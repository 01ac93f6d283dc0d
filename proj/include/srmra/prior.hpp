#pragma once

#include <variant>

#include "srmra/rng.hpp"
#include "srmra/signal.hpp"
#include "srmra/types.hpp"

namespace srmra {

/// Gaussian prior N(0, Sigma). The circulant form stores the eigenvalues of
/// Sigma per frequency index (its power profile); the dense form stores the
/// precision Sigma^{-1} directly.
class PriorSpec {
public:
    struct Circulant {
        Vector power_profile;
    };
    struct Dense {
        Matrix precision;
    };

    static PriorSpec circulant(Vector power_profile);
    static PriorSpec dense(Matrix precision);

    bool is_circulant() const { return std::holds_alternative<Circulant>(form_); }
    int dimension() const;
    const Vector& power_profile() const;
    /// Dense precision matrix; built from the profile for circulant priors.
    Matrix precision_matrix() const;
    const std::variant<Circulant, Dense>& form() const { return form_; }

private:
    explicit PriorSpec(std::variant<Circulant, Dense> form) : form_(std::move(form)) {}
    std::variant<Circulant, Dense> form_;
};

/// Eigenvalue c / max(1, f) at frequency f = 0..M/2, mirrored, with c set so
/// that the expected squared norm equals M.
Vector inverse_frequency_profile(int M);

/// Constant profile with expected squared norm M.
Vector flat_profile(int M);

/// Zero-mean Gaussian draw with the prior covariance.
HighResSignal sample_prior(const PriorSpec& prior, int M, Rng& rng, Normalize normalize = Normalize::yes);

}  // namespace srmra
