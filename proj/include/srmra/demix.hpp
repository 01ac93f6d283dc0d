#pragma once

#include <cstdint>

#include "srmra/invariants.hpp"
#include "srmra/orbit.hpp"

namespace srmra {

struct DemixOptions {
    int iterations = 2000;
    InvariantWeights weights;
};

struct DemixResult {
    SubSignalSet subs;
    double objective = 0.0;
    int best_restart = 0;
};

/// invariant_distance(mixed_invariants(subs), target) for flattened subs.
double demix_objective(const Eigen::Ref<const Vector>& params, const InvariantTriple& target, int K,
                       const InvariantWeights& weights = {});
Vector demix_gradient(const Eigen::Ref<const Vector>& params, const InvariantTriple& target, int K,
                      const InvariantWeights& weights = {});

/// Local minimization of the invariant mismatch from a given start.
DemixResult demix_from(const std::vector<Vector>& start, const InvariantTriple& target,
                       const DemixOptions& options = {});

/// Best local minimum over `restarts` random Gaussian starts.
DemixResult demix_invariants(const InvariantTriple& target, int K, int restarts, std::uint64_t seed,
                             const DemixOptions& options = {});

}  // namespace srmra
