#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srmra/prior.hpp"
#include "srmra/signal.hpp"
#include "srmra/types.hpp"

namespace srmra {

struct EMConfig {
    double tol = 1e-5;
    int max_iter = 100;
    int restarts = 1;
    std::optional<int> bandlimit;
    std::uint64_t seed = 0;
    /// Worker threads for the restarts; 0 means worker_count().
    unsigned threads = 0;

    void validate() const;
};

struct EMResult {
    HighResSignal estimate;
    /// Log-posterior of the initial point followed by one entry per iteration.
    std::vector<double> log_posterior_trace;
    int restart_index = 0;
    bool converged = false;
    int iterations = 0;
    /// Final log-posterior of every restart, in restart order.
    std::vector<double> restart_log_posteriors;
};

/// The M-step linear system A x = b.
struct MStepSystem {
    Matrix A;
    Vector b;
};

/// Shared state for evaluating the marginal likelihood and running EM steps
/// on one batch: observation spectra, norms and the prior precision are
/// computed once. All shift hypotheses s in [0, M) are enumerated; the
/// sample P R_s x equals sub-signal r = (-s) mod K shifted by
/// c = (s + r) / K on the L-grid, so every residual comes from K cyclic
/// cross-correlations per observation.
class EmEngine {
public:
    EmEngine(const ObservationBatch& batch, const PriorSpec& prior);

    int M() const { return M_; }
    int L() const { return L_; }
    int K() const { return K_; }
    int N() const { return N_; }

    /// N x M matrix of ||y_i - P R_s x||^2.
    RowMatrix residuals(const Eigen::Ref<const Vector>& x) const;
    /// sum_i logsumexp_s(-res / 2 sigma^2) - N log M.
    double log_likelihood(const RowMatrix& residuals) const;
    /// Row-normalized responsibilities exp(-res / 2 sigma^2).
    RowMatrix weights(const RowMatrix& residuals) const;
    MStepSystem assemble(const RowMatrix& weights) const;
    Vector solve(const MStepSystem& system) const;
    double quadratic_form(const Eigen::Ref<const Vector>& x) const;

private:
    int M_, L_, K_, N_;
    double sigma2_;
    CMatrix spectra_;  // N x L, row i = dft(y_i)
    Vector energies_;  // ||y_i||^2
    Matrix precision_;
};

/// Log-likelihood with the Gaussian normalizer dropped. Requires sigma > 0.
double log_likelihood(const HighResSignal& x, const ObservationBatch& batch);
/// log_likelihood - x^T Sigma^{-1} x / 2.
double log_posterior(const HighResSignal& x, const ObservationBatch& batch, const PriorSpec& prior);

RowMatrix shift_residuals(const HighResSignal& x, const ObservationBatch& batch);
RowMatrix e_step(const HighResSignal& x, const ObservationBatch& batch);
MStepSystem assemble_m_step(const RowMatrix& weights, const ObservationBatch& batch, const PriorSpec& prior);
HighResSignal m_step(const RowMatrix& weights, const ObservationBatch& batch, const PriorSpec& prior);

/// One EM run from a given starting point (restart_index is left at 0).
EMResult run_em_from(const Eigen::Ref<const Vector>& start, const EmEngine& engine, const EMConfig& config);

/// Restarts drawn from the prior; returns the run with the largest final
/// log-posterior (lowest restart index on ties).
EMResult run_em(const ObservationBatch& batch, const PriorSpec& prior, const EMConfig& config);

// ---- error metrics ---------------------------------------------------------

struct AlignedError {
    double error = 0.0;
    /// Shift l minimizing ||R_l estimate - truth||.
    int shift = 0;
};

/// min_l ||R_l estimate - truth|| / ||truth||.
AlignedError relative_error(const HighResSignal& estimate, const HighResSignal& truth);

/// |xhat_est[k] - xhat[k]| / |xhat[k]| for k = 0..M/2 after alignment;
/// nullopt where the truth coefficient vanishes.
std::vector<std::optional<double>> per_frequency_error(const HighResSignal& estimate, const HighResSignal& truth);

/// Truth with frequencies above `cutoff` removed (the Nyquist baseline).
HighResSignal low_pass(const HighResSignal& x, int cutoff);

}  // namespace srmra
