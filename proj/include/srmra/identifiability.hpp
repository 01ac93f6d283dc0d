#pragma once

#include <cstdint>
#include <vector>

#include "srmra/invariants.hpp"
#include "srmra/orbit.hpp"
#include "srmra/types.hpp"

namespace srmra {

/// Exact rational value of the bound on K below which the first three mixed
/// invariants identify the orbit:
///   (L + 3 + floor(L/2) + ceil((L-1)(L-2)/6)) / (L + 1).
struct IdentifiabilityBound {
    long long numerator = 0;
    long long denominator = 1;
    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
    /// Largest integer K with K < bound.
    long long max_identifiable_K() const { return (numerator - 1) / denominator; }
};

IdentifiabilityBound identifiability_bound(int L);

/// Real coordinates of a triple: mean, L power-spectrum entries, then the
/// real and imaginary parts of the bispectrum in row-major order.
Vector invariant_coordinates(const InvariantTriple& t);
InvariantTriple triple_from_coordinates(const Eigen::Ref<const Vector>& coords, int L);

/// Sub-signals concatenated into one parameter vector and back.
Vector flatten(const std::vector<Vector>& subs);
std::vector<Vector> unflatten(const Eigen::Ref<const Vector>& params, int K, int L);

/// Exact Jacobian of params -> invariant_coordinates(mixed_invariants(subs)),
/// size (1 + L + 2 L^2) x (K L).
Matrix moment_map_jacobian(const std::vector<Vector>& subs);

/// Number of singular values above tol * largest singular value.
int numerical_rank(const Matrix& jacobian, double tol);

struct RankTestResult {
    int L = 0;
    int K = 0;
    int rank = 0;
    int parameters = 0;
    bool identifiable = false;
    IdentifiabilityBound bound;
    std::vector<int> trial_ranks;
};

/// Rank of the moment-map Jacobian at `trials` random Gaussian points
/// (maximum over trials). identifiable == (rank == K L).
RankTestResult jacobian_rank_test(int L, int K, int trials = 3, double tol = 1e-8, std::uint64_t seed = 0);

}  // namespace srmra
