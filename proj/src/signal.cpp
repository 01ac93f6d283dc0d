#include "srmra/signal.hpp"

#include <cmath>
#include <string>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"

namespace srmra {

HighResSignal::HighResSignal(Vector values, std::optional<int> bandlimit)
    : values_(std::move(values)), bandlimit_(bandlimit) {
    require(values_.size() >= 1, "signal must have at least one entry");
    require(values_.allFinite(), "signal entries must be finite");
    if (bandlimit_) {
        const auto M = values_.size();
        require(*bandlimit_ >= 0, "bandlimit must be non-negative");
        const CVector spectrum = dft(values_);
        const double scale = std::sqrt(static_cast<double>(M)) * std::max(values_.norm(), 1e-300);
        for (Eigen::Index k = *bandlimit_ + 1; k < M - *bandlimit_; ++k) {
            require(std::abs(spectrum[k]) <= 1e-9 * scale,
                    "signal has energy above its bandlimit at frequency " + std::to_string(k));
        }
    }
}

void ModelParams::validate() const {
    require(M >= 1, "M must be positive");
    require(L >= 1, "L must be positive");
    require(N >= 1, "N must be positive");
    require(M % L == 0, "L must divide M");
    require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and non-negative");
}

void ObservationBatch::validate() const {
    params.validate();
    require(samples.cols() == params.L, "observation length differs from L");
    require(samples.rows() >= 1, "batch is empty");
    if (true_shifts) {
        require(static_cast<Eigen::Index>(true_shifts->size()) == samples.rows(),
                "true_shifts length differs from N");
        for (int s : *true_shifts) {
            require(s >= 0 && s < params.M, "true shift out of range");
        }
    }
}

Vector circular_shift(const Eigen::Ref<const Vector>& z, long long s) {
    const auto n = static_cast<long long>(z.size());
    Vector out(z.size());
    if (n == 0) {
        return out;
    }
    const long long shift = wrap_index(s, n);
    for (long long i = 0; i < n; ++i) {
        out[wrap_index(i + shift, n)] = z[i];
    }
    return out;
}

Vector sample_grid(const Eigen::Ref<const Vector>& x, int L, long long s) {
    const auto M = static_cast<long long>(x.size());
    require(L >= 1 && M % L == 0, "L must divide the signal length");
    const long long K = M / L;
    Vector y(L);
    for (long long l = 0; l < L; ++l) {
        y[l] = x[wrap_index(l * K - s, M)];
    }
    return y;
}

Vector normalize_energy(const Eigen::Ref<const Vector>& x) {
    const double norm = x.norm();
    if (norm == 0.0) {
        return x;
    }
    return x * (std::sqrt(static_cast<double>(x.size())) / norm);
}

std::pair<Vector, int> sample_observation(const HighResSignal& x, const ModelParams& params, Rng& rng) {
    params.validate();
    require(x.size() == params.M, "signal length differs from M");
    std::uniform_int_distribution<int> shift_dist(0, params.M - 1);
    const int s = shift_dist(rng);
    Vector y = sample_grid(x.values(), params.L, s);
    if (params.sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, 1.0);
        for (Eigen::Index l = 0; l < y.size(); ++l) {
            y[l] += params.sigma * noise(rng);
        }
    }
    return {std::move(y), s};
}

Rng observation_stream(std::uint64_t seed, std::uint64_t i) {
    return make_stream(seed, i);
}

ObservationBatch generate_batch(const HighResSignal& x, const ModelParams& params) {
    params.validate();
    require(x.size() == params.M, "signal length differs from M");
    ObservationBatch batch;
    batch.params = params;
    batch.samples.resize(params.N, params.L);
    std::vector<int> shifts(static_cast<std::size_t>(params.N));
    for (int i = 0; i < params.N; ++i) {
        Rng rng = observation_stream(params.seed, static_cast<std::uint64_t>(i));
        auto [y, s] = sample_observation(x, params, rng);
        batch.samples.row(i) = y.transpose();
        shifts[static_cast<std::size_t>(i)] = s;
    }
    batch.true_shifts = std::move(shifts);
    return batch;
}

HighResSignal sample_bandlimited_signal(int M, int B, Rng& rng, Normalize normalize) {
    require(M >= 1, "M must be positive");
    require(B >= 0 && 2 * B + 1 <= M, "bandlimit too large: need 2B+1 <= M");
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector spectrum = CVector::Zero(M);
    spectrum[0] = gauss(rng);
    for (int k = 1; k <= B; ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        spectrum[k] = Complex(re, im);
        spectrum[M - k] = std::conj(spectrum[k]);
    }
    Vector values = idft_real(spectrum);
    if (normalize == Normalize::yes) {
        values = normalize_energy(values);
    }
    return HighResSignal(std::move(values), B);
}

}  // namespace srmra
