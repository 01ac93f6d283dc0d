#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srmra/invariants.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"
#include "srmra/types.hpp"

namespace srmra {

/// The K strided sub-signals subs[k][l] = x[k + K l] of a length-M signal.
struct SubSignalSet {
    std::vector<Vector> subs;
    int M = 0;
    int L = 0;
    int K = 0;
};

SubSignalSet decompose(const HighResSignal& x, int L);
SubSignalSet decompose(const Eigen::Ref<const Vector>& x, int L);
Vector recompose(const SubSignalSet& set);

/// Element of the group that permutes sub-signals and shifts each one on the
/// L-grid. Acting on x: subs'[k] = R_{shifts[k]} subs[perm[k]].
struct OrbitElement {
    std::vector<int> perm;
    std::vector<int> shifts;

    static OrbitElement identity(int K);
    /// M-grid circular shift R_c expressed as a group element.
    static OrbitElement grid_shift(int K, int L, long long c);

    bool operator==(const OrbitElement&) const = default;
    auto operator<=>(const OrbitElement&) const = default;
};

/// Group product: the element equal to applying `first`, then `second`.
OrbitElement compose(const OrbitElement& second, const OrbitElement& first, int L);

/// K! L^K, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> orbit_size(int K, int L);

/// Bijection from [0, orbit_size) to the group; permutations in
/// lexicographic order, shift vectors in little-endian base-L order.
OrbitElement orbit_element_at(std::uint64_t index, int K, int L);

Vector apply_orbit_element(const Eigen::Ref<const Vector>& x, const OrbitElement& g, int L);
HighResSignal apply_orbit_element(const HighResSignal& x, const OrbitElement& g, int L);

/// x^T Sigma^{-1} x; uses the Fourier eigen-representation for circulant priors.
double quadratic_form(const Eigen::Ref<const Vector>& x, const PriorSpec& prior);
double quadratic_form(const HighResSignal& x, const PriorSpec& prior);

struct OrbitSelection {
    HighResSignal best;
    OrbitElement element;
    double value = 0.0;
    double runner_up = 0.0;
    bool unique = false;
    std::uint64_t orbit_size = 0;
};

inline constexpr std::uint64_t default_orbit_budget = 1'000'000;

/// Exhaustive minimization of the prior quadratic form over the orbit of x.
/// For circulant priors the comparison is between cyclic-shift classes.
/// Ties within 1e-9 relative resolve to the lexicographically smallest signal.
OrbitSelection orbit_select_map(const HighResSignal& x, int L, const PriorSpec& prior,
                                std::uint64_t budget = default_orbit_budget);

/// Canonical (lexicographically smallest) rotation of y. Two vectors are
/// cyclic shifts of each other iff their canonical rotations agree.
Vector canonical_rotation(const Eigen::Ref<const Vector>& y);

/// True iff b equals some circular shift of a within `tol` (max-abs).
bool is_circular_shift_of(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double tol);

// ---- noiseless recovery and the coupon collector -------------------------

double harmonic_number(int K);
/// K * H_K, the expected number of uniform draws needed to see all K classes.
double coupon_collector_expectation(int K);
/// Draws-to-completion for `runs` independent simulations.
std::vector<int> simulate_coupon_collector(int K, int runs, std::uint64_t seed);

struct NoiselessRecovery {
    std::vector<Vector> representatives;
    std::vector<int> cluster_of_row;
    bool complete = false;
};

/// Groups noiseless observations into cyclic-shift classes on the L-grid
/// (one class per observed sub-signal). Throws NumericalError when the batch
/// is noisy.
NoiselessRecovery recover_orbit_noiseless(const ObservationBatch& batch, double tol = 1e-9);

}  // namespace srmra
