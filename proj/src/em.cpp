#include "srmra/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"
#include "srmra/orbit.hpp"
#include "srmra/parallel.hpp"

namespace srmra {

void EMConfig::validate() const {
    require(tol > 0.0, "EM tolerance must be positive");
    require(max_iter >= 1, "max_iter must be at least one");
    require(restarts >= 1, "restarts must be at least one");
    require(!bandlimit || *bandlimit >= 0, "bandlimit must be non-negative");
}

EmEngine::EmEngine(const ObservationBatch& batch, const PriorSpec& prior)
    : M_(batch.params.M),
      L_(batch.params.L),
      K_(batch.params.K()),
      N_(batch.N()),
      sigma2_(batch.params.sigma * batch.params.sigma) {
    batch.validate();
    if (batch.params.sigma <= 0.0) {
        throw ConfigError("the marginal likelihood needs sigma > 0; use the noiseless recovery path");
    }
    require(prior.dimension() == M_, "prior dimension differs from M");
    spectra_.resize(N_, L_);
    energies_.resize(N_);
    CVector row(L_);
    CVector out(L_);
    for (int i = 0; i < N_; ++i) {
        row = batch.samples.row(i).transpose().cast<Complex>();
        dft(row.data(), out.data(), L_);
        spectra_.row(i) = out.transpose();
        energies_[i] = batch.samples.row(i).squaredNorm();
    }
    precision_ = prior.precision_matrix();
}

RowMatrix EmEngine::residuals(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == M_, "signal length differs from M");
    std::vector<CVector> sub_spectra(static_cast<std::size_t>(K_));
    Vector sub_energy(K_);
    for (int r = 0; r < K_; ++r) {
        CVector sub(L_);
        for (int l = 0; l < L_; ++l) {
            sub[l] = x[r + K_ * l];
        }
        sub_energy[r] = sub.squaredNorm();
        sub_spectra[r] = CVector(L_);
        dft(sub.data(), sub_spectra[r].data(), L_);
    }
    RowMatrix res(N_, M_);
    CVector product(L_);
    CVector corr(L_);
    for (int i = 0; i < N_; ++i) {
        for (int r = 0; r < K_; ++r) {
            // corr[c] = sum_l y[l] x_r[l - c]
            for (int k = 0; k < L_; ++k) {
                product[k] = spectra_(i, k) * std::conj(sub_spectra[r][k]);
            }
            idft(product.data(), corr.data(), L_);
            const double base = energies_[i] + sub_energy[r];
            for (int c = 0; c < L_; ++c) {
                const auto s = wrap_index(static_cast<long long>(c) * K_ - r, M_);
                res(i, s) = base - 2.0 * corr[c].real();
            }
        }
    }
    return res;
}

double EmEngine::log_likelihood(const RowMatrix& residuals) const {
    const double scale = -0.5 / sigma2_;
    double total = 0.0;
    for (int i = 0; i < N_; ++i) {
        const auto a = residuals.row(i) * scale;
        const double peak = a.maxCoeff();
        total += peak + std::log((a.array() - peak).exp().sum());
    }
    return total - N_ * std::log(static_cast<double>(M_));
}

RowMatrix EmEngine::weights(const RowMatrix& residuals) const {
    const double scale = -0.5 / sigma2_;
    RowMatrix w(N_, M_);
    for (int i = 0; i < N_; ++i) {
        const auto a = residuals.row(i) * scale;
        const double peak = a.maxCoeff();
        w.row(i) = (a.array() - peak).exp();
        w.row(i) /= w.row(i).sum();
    }
    return w;
}

MStepSystem EmEngine::assemble(const RowMatrix& weights) const {
    require(weights.rows() == N_ && weights.cols() == M_, "weights must be N x M");
    // b_r[j] = (1/sigma^2) sum_i sum_l W_{i,r}[l - j] y_i[l] with
    // W_{i,r}[c] = w_{i, cK - r}; accumulated in the Fourier domain.
    std::vector<CVector> b_hat(static_cast<std::size_t>(K_), CVector::Zero(L_));
    CVector w_sub(L_);
    CVector w_hat(L_);
    for (int i = 0; i < N_; ++i) {
        for (int r = 0; r < K_; ++r) {
            for (int c = 0; c < L_; ++c) {
                w_sub[c] = weights(i, wrap_index(static_cast<long long>(c) * K_ - r, M_));
            }
            dft(w_sub.data(), w_hat.data(), L_);
            for (int k = 0; k < L_; ++k) {
                b_hat[r][k] += spectra_(i, k) * std::conj(w_hat[k]);
            }
        }
    }
    const Vector column_mass = weights.colwise().sum().transpose();
    MStepSystem system;
    system.A = precision_;
    system.b.resize(M_);
    CVector b_sub(L_);
    for (int r = 0; r < K_; ++r) {
        idft(b_hat[r].data(), b_sub.data(), L_);
        double diagonal = 0.0;
        for (int c = 0; c < L_; ++c) {
            diagonal += column_mass[wrap_index(static_cast<long long>(c) * K_ - r, M_)];
        }
        for (int j = 0; j < L_; ++j) {
            const int m = r + K_ * j;
            system.b[m] = b_sub[j].real() / sigma2_;
            system.A(m, m) += diagonal / sigma2_;
        }
    }
    return system;
}

Vector EmEngine::solve(const MStepSystem& system) const {
    Eigen::LLT<Matrix> chol(system.A);
    if (chol.info() != Eigen::Success) {
        throw NumericalError("M-step matrix is not positive definite");
    }
    return chol.solve(system.b);
}

double EmEngine::quadratic_form(const Eigen::Ref<const Vector>& x) const {
    return x.dot(precision_ * x);
}

double log_likelihood(const HighResSignal& x, const ObservationBatch& batch) {
    // The likelihood does not depend on the prior; a flat placeholder keeps
    // the engine construction uniform.
    const EmEngine engine(batch, PriorSpec::circulant(Vector::Ones(batch.params.M)));
    return engine.log_likelihood(engine.residuals(x.values()));
}

double log_posterior(const HighResSignal& x, const ObservationBatch& batch, const PriorSpec& prior) {
    return log_likelihood(x, batch) - 0.5 * srmra::quadratic_form(x, prior);
}

RowMatrix shift_residuals(const HighResSignal& x, const ObservationBatch& batch) {
    const EmEngine engine(batch, PriorSpec::circulant(Vector::Ones(batch.params.M)));
    return engine.residuals(x.values());
}

RowMatrix e_step(const HighResSignal& x, const ObservationBatch& batch) {
    const EmEngine engine(batch, PriorSpec::circulant(Vector::Ones(batch.params.M)));
    return engine.weights(engine.residuals(x.values()));
}

MStepSystem assemble_m_step(const RowMatrix& weights, const ObservationBatch& batch, const PriorSpec& prior) {
    const EmEngine engine(batch, prior);
    return engine.assemble(weights);
}

HighResSignal m_step(const RowMatrix& weights, const ObservationBatch& batch, const PriorSpec& prior) {
    const EmEngine engine(batch, prior);
    return HighResSignal(engine.solve(engine.assemble(weights)));
}

EMResult run_em_from(const Eigen::Ref<const Vector>& start, const EmEngine& engine, const EMConfig& config) {
    config.validate();
    require(start.size() == engine.M(), "starting point length differs from M");
    Vector x = config.bandlimit ? project_bandlimit(start, *config.bandlimit) : Vector(start);
    RowMatrix res = engine.residuals(x);
    double lp = engine.log_likelihood(res) - 0.5 * engine.quadratic_form(x);

    EMResult out;
    out.log_posterior_trace.push_back(lp);
    for (int it = 1; it <= config.max_iter; ++it) {
        const RowMatrix w = engine.weights(res);
        x = engine.solve(engine.assemble(w));
        if (config.bandlimit) {
            x = project_bandlimit(x, *config.bandlimit);
        }
        res = engine.residuals(x);
        const double next = engine.log_likelihood(res) - 0.5 * engine.quadratic_form(x);
        out.log_posterior_trace.push_back(next);
        out.iterations = it;
        const double change = std::abs(next - lp) / std::max(1.0, std::abs(lp));
        lp = next;
        if (change < config.tol) {
            out.converged = true;
            break;
        }
    }
    if (!x.allFinite()) {
        throw NumericalError("EM iterate is not finite");
    }
    out.estimate = HighResSignal(std::move(x));
    out.restart_log_posteriors = {lp};
    return out;
}

EMResult run_em(const ObservationBatch& batch, const PriorSpec& prior, const EMConfig& config) {
    config.validate();
    const EmEngine engine(batch, prior);
    std::vector<EMResult> runs(static_cast<std::size_t>(config.restarts));
    parallel_for(runs.size(), [&](std::size_t r) {
        Rng rng = make_stream(config.seed, r);
        const HighResSignal start = sample_prior(prior, engine.M(), rng, Normalize::no);
        runs[r] = run_em_from(start.values(), engine, config);
    }, config.threads == 0 ? worker_count() : config.threads);
    std::size_t best = 0;
    std::vector<double> finals;
    finals.reserve(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        finals.push_back(runs[r].log_posterior_trace.back());
        if (finals[r] > finals[best]) {
            best = r;
        }
    }
    EMResult out = std::move(runs[best]);
    out.restart_index = static_cast<int>(best);
    out.restart_log_posteriors = std::move(finals);
    return out;
}

AlignedError relative_error(const HighResSignal& estimate, const HighResSignal& truth) {
    require(estimate.size() == truth.size(), "estimate and truth lengths differ");
    const double truth_norm2 = truth.values().squaredNorm();
    if (truth_norm2 == 0.0) {
        throw NumericalError("relative error against a zero signal");
    }
    // corr[l] = <R_l estimate, truth> = sum_n truth[n] estimate[n - l]
    const CVector th = dft(truth.values());
    const CVector eh = dft(estimate.values());
    const CVector corr = idft(CVector(th.cwiseProduct(eh.conjugate())));
    const double est_norm2 = estimate.values().squaredNorm();
    Vector d2(truth.size());
    for (int l = 0; l < truth.size(); ++l) {
        d2[l] = est_norm2 + truth_norm2 - 2.0 * corr[l].real();
    }
    // The expanded form loses ~sqrt(eps) near zero; rescore the near-best
    // shifts with the direct distance.
    const double slack = 1e-8 * (est_norm2 + truth_norm2);
    const double lowest = d2.minCoeff();
    AlignedError best{std::numeric_limits<double>::infinity(), 0};
    for (int l = 0; l < truth.size(); ++l) {
        if (d2[l] > lowest + slack) {
            continue;
        }
        const double e = (circular_shift(estimate.values(), l) - truth.values()).norm() / std::sqrt(truth_norm2);
        if (e < best.error) {
            best = {e, l};
        }
    }
    return best;
}

std::vector<std::optional<double>> per_frequency_error(const HighResSignal& estimate, const HighResSignal& truth) {
    const AlignedError aligned = relative_error(estimate, truth);
    const CVector eh = dft(circular_shift(estimate.values(), aligned.shift));
    const CVector th = dft(truth.values());
    const double floor = 1e-12 * std::max(1.0, th.cwiseAbs().maxCoeff());
    std::vector<std::optional<double>> out;
    for (int k = 0; k <= truth.size() / 2; ++k) {
        const double magnitude = std::abs(th[k]);
        if (magnitude < floor) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(std::abs(eh[k] - th[k]) / magnitude);
        }
    }
    return out;
}

HighResSignal low_pass(const HighResSignal& x, int cutoff) {
    return HighResSignal(project_bandlimit(x.values(), cutoff));
}

}  // namespace srmra
