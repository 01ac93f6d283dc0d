#include "srmra/identifiability.hpp"

#include <cmath>
#include <numbers>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"
#include "srmra/rng.hpp"

namespace srmra {

IdentifiabilityBound identifiability_bound(int L) {
    require(L >= 1, "L must be positive");
    const long long l = L;
    const long long product = (l - 1) * (l - 2);
    const long long ceil_sixth = (product + 5) / 6;
    return {l + 3 + l / 2 + ceil_sixth, l + 1};
}

Vector invariant_coordinates(const InvariantTriple& t) {
    const Eigen::Index L = t.L();
    Vector coords(1 + L + 2 * L * L);
    coords[0] = t.mean;
    coords.segment(1, L) = t.power_spectrum;
    for (Eigen::Index a = 0; a < L; ++a) {
        for (Eigen::Index b = 0; b < L; ++b) {
            coords[1 + L + a * L + b] = t.bispectrum(a, b).real();
            coords[1 + L + L * L + a * L + b] = t.bispectrum(a, b).imag();
        }
    }
    return coords;
}

InvariantTriple triple_from_coordinates(const Eigen::Ref<const Vector>& coords, int L) {
    require(coords.size() == 1 + L + 2 * L * L, "coordinate vector has the wrong length");
    InvariantTriple t;
    t.mean = coords[0];
    t.power_spectrum = coords.segment(1, L);
    t.bispectrum.resize(L, L);
    for (int a = 0; a < L; ++a) {
        for (int b = 0; b < L; ++b) {
            t.bispectrum(a, b) = Complex(coords[1 + L + a * L + b], coords[1 + L + L * L + a * L + b]);
        }
    }
    return t;
}

Vector flatten(const std::vector<Vector>& subs) {
    require(!subs.empty(), "no sub-signals");
    const auto L = subs.front().size();
    Vector params(static_cast<Eigen::Index>(subs.size()) * L);
    for (std::size_t k = 0; k < subs.size(); ++k) {
        require(subs[k].size() == L, "sub-signals have different lengths");
        params.segment(static_cast<Eigen::Index>(k) * L, L) = subs[k];
    }
    return params;
}

std::vector<Vector> unflatten(const Eigen::Ref<const Vector>& params, int K, int L) {
    require(params.size() == static_cast<Eigen::Index>(K) * L, "parameter vector has the wrong length");
    std::vector<Vector> subs(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        subs[k] = params.segment(static_cast<Eigen::Index>(k) * L, L);
    }
    return subs;
}

Matrix moment_map_jacobian(const std::vector<Vector>& subs) {
    require(!subs.empty(), "no sub-signals");
    const int K = static_cast<int>(subs.size());
    const int L = static_cast<int>(subs.front().size());
    const double invK = 1.0 / K;
    // phase(q, n) = exp(-2 pi i q n / L) = d zhat[q] / d z[n]
    CMatrix phase(L, L);
    for (int q = 0; q < L; ++q) {
        for (int n = 0; n < L; ++n) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(q) * n) % L) / L;
            phase(q, n) = std::polar(1.0, angle);
        }
    }
    const Eigen::Index rows = 1 + L + 2 * static_cast<Eigen::Index>(L) * L;
    Matrix J = Matrix::Zero(rows, static_cast<Eigen::Index>(K) * L);
    for (int k = 0; k < K; ++k) {
        require(subs[k].size() == L, "sub-signals have different lengths");
        const CVector zhat = dft(subs[k]);
        for (int n = 0; n < L; ++n) {
            const Eigen::Index col = static_cast<Eigen::Index>(k) * L + n;
            J(0, col) = invK;
            for (int q = 0; q < L; ++q) {
                J(1 + q, col) = 2.0 * invK * (std::conj(zhat[q]) * phase(q, n)).real();
            }
            for (int a = 0; a < L; ++a) {
                for (int b = 0; b < L; ++b) {
                    const int c = static_cast<int>(wrap_index(-a - b, L));
                    const Complex d = phase(a, n) * zhat[b] * zhat[c] + zhat[a] * phase(b, n) * zhat[c] +
                                      zhat[a] * zhat[b] * phase(c, n);
                    J(1 + L + a * L + b, col) = invK * d.real();
                    J(1 + L + L * L + a * L + b, col) = invK * d.imag();
                }
            }
        }
    }
    return J;
}

int numerical_rank(const Matrix& jacobian, double tol) {
    require(tol > 0.0, "rank tolerance must be positive");
    if (jacobian.size() == 0) {
        return 0;
    }
    Eigen::BDCSVD<Matrix> svd(jacobian);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        rank += sv[i] > tol * sv[0] ? 1 : 0;
    }
    return rank;
}

RankTestResult jacobian_rank_test(int L, int K, int trials, double tol, std::uint64_t seed) {
    require(L >= 1 && K >= 1, "L and K must be positive");
    require(trials >= 1, "trials must be at least one");
    RankTestResult out;
    out.L = L;
    out.K = K;
    out.parameters = K * L;
    out.bound = identifiability_bound(L);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(t));
        std::vector<Vector> subs(static_cast<std::size_t>(K), Vector(L));
        for (auto& s : subs) {
            for (int l = 0; l < L; ++l) {
                s[l] = gauss(rng);
            }
        }
        const int r = numerical_rank(moment_map_jacobian(subs), tol);
        out.trial_ranks.push_back(r);
        out.rank = std::max(out.rank, r);
    }
    out.identifiable = out.rank == out.parameters;
    return out;
}

}  // namespace srmra
