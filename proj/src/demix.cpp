#include "srmra/demix.hpp"

#include <cmath>
#include <limits>

#include "srmra/errors.hpp"
#include "srmra/identifiability.hpp"
#include "srmra/rng.hpp"

namespace srmra {
namespace {

Vector coordinate_weights(int L, const InvariantWeights& w) {
    Vector weights(1 + L + 2 * L * L);
    weights[0] = w.mean;
    weights.segment(1, L).setConstant(w.power_spectrum);
    weights.tail(2 * L * L).setConstant(w.bispectrum);
    return weights;
}

}  // namespace

double demix_objective(const Eigen::Ref<const Vector>& params, const InvariantTriple& target, int K,
                       const InvariantWeights& weights) {
    return invariant_distance(mixed_invariants(unflatten(params, K, target.L())), target, weights);
}

Vector demix_gradient(const Eigen::Ref<const Vector>& params, const InvariantTriple& target, int K,
                      const InvariantWeights& weights) {
    const int L = target.L();
    const auto subs = unflatten(params, K, L);
    const Vector residual = invariant_coordinates(mixed_invariants(subs)) - invariant_coordinates(target);
    const Vector w = coordinate_weights(L, weights);
    return 2.0 * moment_map_jacobian(subs).transpose() * w.cwiseProduct(residual);
}

DemixResult demix_from(const std::vector<Vector>& start, const InvariantTriple& target, const DemixOptions& options) {
    require(!start.empty(), "no starting sub-signals");
    const int K = static_cast<int>(start.size());
    const int L = target.L();
    Vector params = flatten(start);
    require(params.size() == static_cast<Eigen::Index>(K) * L, "starting sub-signals do not match L");
    const Vector w = coordinate_weights(L, options.weights);
    const Vector target_coords = invariant_coordinates(target);

    double value = demix_objective(params, target, K, options.weights);
    double step = 1.0;
    for (int it = 0; it < options.iterations && value > 0.0; ++it) {
        const auto subs = unflatten(params, K, L);
        const Vector residual = invariant_coordinates(mixed_invariants(subs)) - target_coords;
        const Vector grad = 2.0 * moment_map_jacobian(subs).transpose() * w.cwiseProduct(residual);
        const double g2 = grad.squaredNorm();
        if (g2 == 0.0) {
            break;
        }
        // Armijo backtracking; the step grows again after each accepted move.
        step *= 2.0;
        bool accepted = false;
        while (step * std::sqrt(g2) > 1e-300) {
            const Vector trial = params - step * grad;
            const double trial_value = demix_objective(trial, target, K, options.weights);
            if (trial_value <= value - 1e-4 * step * g2) {
                params = trial;
                value = trial_value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
    }
    DemixResult out;
    out.subs.subs = unflatten(params, K, L);
    out.subs.K = K;
    out.subs.L = L;
    out.subs.M = K * L;
    out.objective = value;
    return out;
}

DemixResult demix_invariants(const InvariantTriple& target, int K, int restarts, std::uint64_t seed,
                             const DemixOptions& options) {
    require(K >= 1, "K must be positive");
    require(restarts >= 1, "restarts must be at least one");
    const int L = target.L();
    // Start at the scale implied by the target power spectrum: E|zhat|^2 = L var.
    const double variance = std::max(target.power_spectrum.mean() / L, 1e-12);
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
    DemixResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(r));
        std::vector<Vector> start(static_cast<std::size_t>(K), Vector(L));
        for (auto& s : start) {
            for (int l = 0; l < L; ++l) {
                s[l] = gauss(rng);
            }
        }
        DemixResult candidate = demix_from(start, target, options);
        if (candidate.objective < best.objective) {
            best = std::move(candidate);
            best.best_restart = r;
        }
    }
    return best;
}

}  // namespace srmra
