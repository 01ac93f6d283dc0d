#pragma once

#include <array>
#include <vector>

#include "srmra/signal.hpp"
#include "srmra/types.hpp"

namespace srmra {

/// Mean, power spectrum and bispectrum of a length-L signal (or an average
/// of such triples). `mean` holds zhat[0], i.e. the sum of the entries.
struct InvariantTriple {
    double mean = 0.0;
    Vector power_spectrum;
    CMatrix bispectrum;

    int L() const { return static_cast<int>(power_spectrum.size()); }
};

/// Additive noise offsets of the empirical power spectrum and bispectrum.
struct BiasTerms {
    Vector b2;
    Matrix b3;
    double xbar = 0.0;
};

/// Per-entry standard errors of an empirical triple.
struct InvariantStandardErrors {
    double mean = 0.0;
    Vector power_spectrum;
    Matrix bispectrum_real;
    Matrix bispectrum_imag;
};

/// Order-q auto-correlation, q in {1, 2, 3}:
///   q = 1 -> 1x1 (sum of entries), q = 2 -> Lx1, q = 3 -> LxL,
/// entry [l1, l2] = sum_i z[i] z[i + l1] z[i + l2] (indices mod L).
Matrix autocorrelation(const Eigen::Ref<const Vector>& z, int q);

InvariantTriple fourier_invariants(const Eigen::Ref<const Vector>& z);

/// Componentwise average of the triples of equal-length vectors.
InvariantTriple mixed_invariants(const std::vector<Vector>& subs);

/// Streaming accumulator of per-observation triples. Sums are compensated
/// (Neumaier) so the result does not depend on accumulation order beyond
/// round-off of the final division.
class InvariantAccumulator {
public:
    explicit InvariantAccumulator(int L);

    void add(const Eigen::Ref<const Vector>& y);
    void merge(const InvariantAccumulator& other);

    long long count() const { return count_; }
    InvariantTriple mean() const;
    InvariantStandardErrors standard_errors() const;

private:
    struct Sum {
        double value = 0.0;
        double compensation = 0.0;
        void add(double x);
        void merge(const Sum& other);
        double total() const { return value + compensation; }
    };
    struct Moments {
        Sum first;
        Sum second;
        void add(double x);
        void merge(const Moments& other);
    };

    int L_;
    long long count_ = 0;
    Moments mean_;
    std::vector<Moments> power_;
    std::vector<Moments> bis_re_;
    std::vector<Moments> bis_im_;
};

/// Sample average of the per-observation triples, without debiasing.
InvariantTriple empirical_invariants(const ObservationBatch& batch);
InvariantAccumulator accumulate_invariants(const ObservationBatch& batch);

/// Bias pattern matrix: D[0,0] = 3, D[i,0] = D[0,i] = D[i,L-i] = 1.
Matrix bias_pattern(int L);
BiasTerms bias_terms(double xbar, double sigma, int L);

/// Removes the noise bias. xbar is estimated as triple.mean / L.
InvariantTriple debias(const InvariantTriple& triple, double sigma, int L);

struct InvariantWeights {
    double mean = 1.0;
    double power_spectrum = 1.0;
    double bispectrum = 1.0;
};

double invariant_distance(const InvariantTriple& a, const InvariantTriple& b,
                          const InvariantWeights& weights = {});

}  // namespace srmra
