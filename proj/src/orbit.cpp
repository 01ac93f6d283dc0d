#include "srmra/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"

namespace srmra {

SubSignalSet decompose(const Eigen::Ref<const Vector>& x, int L) {
    const auto M = static_cast<int>(x.size());
    require(L >= 1 && M >= 1 && M % L == 0, "L must divide the signal length");
    SubSignalSet set;
    set.M = M;
    set.L = L;
    set.K = M / L;
    set.subs.assign(static_cast<std::size_t>(set.K), Vector(L));
    for (int k = 0; k < set.K; ++k) {
        for (int l = 0; l < L; ++l) {
            set.subs[k][l] = x[k + set.K * l];
        }
    }
    return set;
}

SubSignalSet decompose(const HighResSignal& x, int L) {
    return decompose(x.values(), L);
}

Vector recompose(const SubSignalSet& set) {
    require(static_cast<int>(set.subs.size()) == set.K && set.K * set.L == set.M, "inconsistent sub-signal set");
    Vector x(set.M);
    for (int k = 0; k < set.K; ++k) {
        require(set.subs[k].size() == set.L, "sub-signal has the wrong length");
        for (int l = 0; l < set.L; ++l) {
            x[k + set.K * l] = set.subs[k][l];
        }
    }
    return x;
}

OrbitElement OrbitElement::identity(int K) {
    OrbitElement g;
    g.perm.resize(static_cast<std::size_t>(K));
    std::iota(g.perm.begin(), g.perm.end(), 0);
    g.shifts.assign(static_cast<std::size_t>(K), 0);
    return g;
}

OrbitElement OrbitElement::grid_shift(int K, int L, long long c) {
    // (R_c x)[k + K l] = x[k - c + K l] = subs[r][l + q] with k - c = r + K q.
    OrbitElement g;
    g.perm.resize(static_cast<std::size_t>(K));
    g.shifts.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const long long d = k - c;
        const long long r = wrap_index(d, K);
        const long long q = (d - r) / K;
        g.perm[k] = static_cast<int>(r);
        g.shifts[k] = static_cast<int>(wrap_index(-q, L));
    }
    return g;
}

OrbitElement compose(const OrbitElement& second, const OrbitElement& first, int L) {
    require(second.perm.size() == first.perm.size(), "orbit elements have different K");
    const auto K = second.perm.size();
    OrbitElement out;
    out.perm.resize(K);
    out.shifts.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto j = static_cast<std::size_t>(second.perm[k]);
        out.perm[k] = first.perm[j];
        out.shifts[k] = static_cast<int>(wrap_index(second.shifts[k] + first.shifts[j], L));
    }
    return out;
}

std::optional<std::uint64_t> orbit_size(int K, int L) {
    require(K >= 1 && L >= 1, "K and L must be positive");
    constexpr auto limit = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t size = 1;
    for (int k = 2; k <= K; ++k) {
        if (size > limit / static_cast<std::uint64_t>(k)) {
            return std::nullopt;
        }
        size *= static_cast<std::uint64_t>(k);
    }
    for (int k = 0; k < K; ++k) {
        if (size > limit / static_cast<std::uint64_t>(L)) {
            return std::nullopt;
        }
        size *= static_cast<std::uint64_t>(L);
    }
    return size;
}

OrbitElement orbit_element_at(std::uint64_t index, int K, int L) {
    OrbitElement g;
    g.shifts.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        g.shifts[k] = static_cast<int>(index % static_cast<std::uint64_t>(L));
        index /= static_cast<std::uint64_t>(L);
    }
    // Remaining index is the lexicographic rank of the permutation (Lehmer code).
    std::vector<int> pool(static_cast<std::size_t>(K));
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<std::uint64_t> factorial(static_cast<std::size_t>(K) + 1, 1);
    for (int k = 1; k <= K; ++k) {
        factorial[k] = factorial[k - 1] * static_cast<std::uint64_t>(k);
    }
    g.perm.reserve(static_cast<std::size_t>(K));
    for (int k = K; k >= 1; --k) {
        const std::uint64_t f = factorial[k - 1];
        const auto pick = static_cast<std::size_t>(index / f);
        index %= f;
        g.perm.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return g;
}

Vector apply_orbit_element(const Eigen::Ref<const Vector>& x, const OrbitElement& g, int L) {
    SubSignalSet set = decompose(x, L);
    require(static_cast<int>(g.perm.size()) == set.K && static_cast<int>(g.shifts.size()) == set.K,
            "orbit element does not match K");
    SubSignalSet out = set;
    for (int k = 0; k < set.K; ++k) {
        out.subs[k] = circular_shift(set.subs[g.perm[k]], g.shifts[k]);
    }
    return recompose(out);
}

HighResSignal apply_orbit_element(const HighResSignal& x, const OrbitElement& g, int L) {
    return HighResSignal(apply_orbit_element(x.values(), g, L));
}

double quadratic_form(const Eigen::Ref<const Vector>& x, const PriorSpec& prior) {
    require(prior.dimension() == x.size(), "prior dimension differs from signal length");
    if (prior.is_circulant()) {
        // x^T Sigma^{-1} x = (1/M) sum_k |xhat[k]|^2 / lambda_k
        const CVector xhat = dft(x);
        return (xhat.cwiseAbs2().array() / prior.power_profile().array()).sum() / static_cast<double>(x.size());
    }
    const auto& precision = std::get<PriorSpec::Dense>(prior.form()).precision;
    return x.dot(precision * x);
}

double quadratic_form(const HighResSignal& x, const PriorSpec& prior) {
    return quadratic_form(x.values(), prior);
}

namespace {

bool lexicographically_less(const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool values_tie(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Smallest orbit index among {grid_shift(c) * g : c in [0, M)}; identifies
// the cyclic-shift class of g x.
std::uint64_t class_key(const OrbitElement& g, int L, const std::vector<OrbitElement>& grid_shifts) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (const auto& shift : grid_shifts) {
        const OrbitElement h = compose(shift, g, L);
        // Encode h in the same order as orbit_element_at.
        std::uint64_t perm_rank = 0;
        const auto k_count = h.perm.size();
        for (std::size_t i = 0; i < k_count; ++i) {
            std::uint64_t smaller = 0;
            for (std::size_t j = i + 1; j < k_count; ++j) {
                smaller += h.perm[j] < h.perm[i] ? 1 : 0;
            }
            perm_rank = perm_rank * (k_count - i) + smaller;
        }
        std::uint64_t index = perm_rank;
        for (std::size_t i = k_count; i-- > 0;) {
            index = index * static_cast<std::uint64_t>(L) + static_cast<std::uint64_t>(h.shifts[i]);
        }
        best = std::min(best, index);
    }
    return best;
}

}  // namespace

OrbitSelection orbit_select_map(const HighResSignal& x, int L, const PriorSpec& prior, std::uint64_t budget) {
    const int M = x.size();
    require(L >= 1 && M % L == 0, "L must divide M");
    require(prior.dimension() == M, "prior dimension differs from M");
    const int K = M / L;
    const auto size = orbit_size(K, L);
    require(size.has_value() && *size <= budget, "orbit size exceeds the enumeration budget");

    const bool by_class = prior.is_circulant();
    std::vector<OrbitElement> grid_shifts;
    if (by_class) {
        for (int c = 0; c < M; ++c) {
            grid_shifts.push_back(OrbitElement::grid_shift(K, L, c));
        }
    }

    std::vector<double> values(*size);
    std::vector<std::uint64_t> keys(*size);
    for (std::uint64_t i = 0; i < *size; ++i) {
        const OrbitElement g = orbit_element_at(i, K, L);
        values[i] = quadratic_form(apply_orbit_element(x.values(), g, L), prior);
        keys[i] = by_class ? class_key(g, L, grid_shifts) : i;
    }

    const double minimum = *std::min_element(values.begin(), values.end());
    // Lexicographic tie-break among all near-minimal elements.
    std::uint64_t best_index = 0;
    Vector best_signal;
    bool have_best = false;
    for (std::uint64_t i = 0; i < *size; ++i) {
        if (!values_tie(values[i], minimum)) {
            continue;
        }
        Vector y = apply_orbit_element(x.values(), orbit_element_at(i, K, L), L);
        if (!have_best || lexicographically_less(y, best_signal)) {
            best_signal = std::move(y);
            best_index = i;
            have_best = true;
        }
    }
    const std::uint64_t best_key = keys[best_index];
    double runner_up = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < *size; ++i) {
        if (keys[i] != best_key) {
            runner_up = std::min(runner_up, values[i]);
        }
    }

    OrbitSelection out;
    out.best = HighResSignal(std::move(best_signal));
    out.element = orbit_element_at(best_index, K, L);
    out.value = values[best_index];
    out.runner_up = runner_up;
    out.unique = !std::isfinite(runner_up) ||
                 runner_up - out.value > 1e-9 * std::max(std::abs(out.value), 1e-300);
    out.orbit_size = *size;
    return out;
}

Vector canonical_rotation(const Eigen::Ref<const Vector>& y) {
    Vector best = y;
    for (Eigen::Index s = 1; s < y.size(); ++s) {
        Vector candidate = circular_shift(y, s);
        if (lexicographically_less(candidate, best)) {
            best = std::move(candidate);
        }
    }
    return best;
}

bool is_circular_shift_of(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double tol) {
    if (a.size() != b.size()) {
        return false;
    }
    for (Eigen::Index s = 0; s < a.size(); ++s) {
        if ((circular_shift(a, s) - b).cwiseAbs().maxCoeff() <= tol) {
            return true;
        }
    }
    return a.size() == 0;
}

double harmonic_number(int K) {
    require(K >= 1, "K must be positive");
    double h = 0.0;
    for (int k = K; k >= 1; --k) {
        h += 1.0 / k;
    }
    return h;
}

double coupon_collector_expectation(int K) {
    return K * harmonic_number(K);
}

std::vector<int> simulate_coupon_collector(int K, int runs, std::uint64_t seed) {
    require(K >= 1 && runs >= 1, "K and runs must be positive");
    std::vector<int> draws(static_cast<std::size_t>(runs));
    for (int r = 0; r < runs; ++r) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(r));
        std::uniform_int_distribution<int> coupon(0, K - 1);
        std::vector<bool> seen(static_cast<std::size_t>(K), false);
        int distinct = 0;
        int count = 0;
        while (distinct < K) {
            const int c = coupon(rng);
            ++count;
            if (!seen[c]) {
                seen[c] = true;
                ++distinct;
            }
        }
        draws[r] = count;
    }
    return draws;
}

NoiselessRecovery recover_orbit_noiseless(const ObservationBatch& batch, double tol) {
    batch.validate();
    if (batch.params.sigma > 0.0) {
        throw NumericalError("noiseless recovery requires a batch generated with sigma = 0");
    }
    NoiselessRecovery out;
    out.cluster_of_row.assign(static_cast<std::size_t>(batch.N()), -1);
    for (int i = 0; i < batch.N(); ++i) {
        const Vector row = batch.samples.row(i).transpose();
        int cluster = -1;
        for (std::size_t c = 0; c < out.representatives.size(); ++c) {
            if (is_circular_shift_of(out.representatives[c], row, tol)) {
                cluster = static_cast<int>(c);
                break;
            }
        }
        if (cluster < 0) {
            cluster = static_cast<int>(out.representatives.size());
            out.representatives.push_back(row);
        }
        out.cluster_of_row[i] = cluster;
    }
    const int K = batch.params.K();
    if (static_cast<int>(out.representatives.size()) > K) {
        throw NumericalError("observations fall into more than K shift classes; the batch is noisy");
    }
    out.complete = static_cast<int>(out.representatives.size()) == K;
    return out;
}

}  // namespace srmra
