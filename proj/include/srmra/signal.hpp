#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "srmra/rng.hpp"
#include "srmra/types.hpp"

namespace srmra {

/// The length-M real target signal, optionally tagged with a bandlimit B
/// (largest nonzero frequency index).
class HighResSignal {
public:
    HighResSignal() = default;
    explicit HighResSignal(Vector values, std::optional<int> bandlimit = std::nullopt);

    const Vector& values() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    const std::optional<int>& bandlimit() const { return bandlimit_; }

private:
    Vector values_;
    std::optional<int> bandlimit_;
};

struct ModelParams {
    int M = 1;
    int L = 1;
    double sigma = 0.0;
    int N = 1;
    std::uint64_t seed = 0;

    int K() const { return M / L; }
    /// Throws ConfigError unless M, L, N >= 1, L | M and sigma >= 0.
    void validate() const;
};

/// N noisy length-L observations together with the parameters that produced them.
struct ObservationBatch {
    RowMatrix samples;
    ModelParams params;
    std::optional<std::vector<int>> true_shifts;

    int N() const { return static_cast<int>(samples.rows()); }
    int L() const { return static_cast<int>(samples.cols()); }
    void validate() const;
};

enum class Normalize { no, yes };

/// (R_s z)[n] = z[(n - s) mod n_total]; s may be any integer.
Vector circular_shift(const Eigen::Ref<const Vector>& z, long long s);

/// Noiseless sample P R_s x: entry l is x[(l K - s) mod M].
Vector sample_grid(const Eigen::Ref<const Vector>& x, int L, long long s);

/// Rescales x so that ||x||^2 = M (SNR = 1/sigma^2). Zero signals are returned unchanged.
Vector normalize_energy(const Eigen::Ref<const Vector>& x);

/// One draw of the observation model: uniform shift, sampling, additive noise.
std::pair<Vector, int> sample_observation(const HighResSignal& x, const ModelParams& params, Rng& rng);

/// Generator used for observation i of a batch seeded with `seed`.
Rng observation_stream(std::uint64_t seed, std::uint64_t i);

/// N independent observations; row i uses observation_stream(params.seed, i).
ObservationBatch generate_batch(const HighResSignal& x, const ModelParams& params);

/// Random real signal whose spectrum is supported on |k| <= B.
HighResSignal sample_bandlimited_signal(int M, int B, Rng& rng, Normalize normalize = Normalize::yes);

}  // namespace srmra
