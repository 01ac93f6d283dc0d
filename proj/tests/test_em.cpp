#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "srmra/em.hpp"
#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"
#include "srmra/orbit.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"

using namespace srmra;

namespace {

ObservationBatch noisy_batch(const Vector& x, int L, double sigma, int N, std::uint64_t seed) {
    return generate_batch(HighResSignal(x), ModelParams{static_cast<int>(x.size()), L, sigma, N, seed});
}

RowMatrix random_weights(int N, int M, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RowMatrix w(N, M);
    for (int i = 0; i < N; ++i) {
        for (int s = 0; s < M; ++s) {
            w(i, s) = unif(rng);
        }
        w.row(i) /= w.row(i).sum();
    }
    return w;
}

Matrix random_spd(int n, std::mt19937_64& rng) {
    Matrix A(n, n);
    for (int j = 0; j < n; ++j) {
        A.col(j) = oracle::gaussian_vector(n, rng);
    }
    return A * A.transpose() / n + Matrix::Identity(n, n);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("residuals, likelihood and weights match the double loop (M=6, L=3)") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector truth = oracle::gaussian_vector(6, rng);
        const Vector x = oracle::gaussian_vector(6, rng);
        const auto batch = noisy_batch(truth, 3, 0.8, 5, trial);
        const HighResSignal hx(x);

        const RowMatrix res = shift_residuals(hx, batch);
        CHECK((res - oracle::naive_residuals(x, batch.samples, 3)).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(rel(log_likelihood(hx, batch), oracle::naive_log_likelihood(x, batch.samples, 3, 0.8)) <= 1e-10);
        CHECK((e_step(hx, batch) - oracle::naive_weights(x, batch.samples, 3, 0.8)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("M-step system matches dense assembly (M=6, L=3, N=4)") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const auto batch = noisy_batch(oracle::gaussian_vector(6, rng), 3, 0.7, 4, 10 + trial);
        const RowMatrix w = random_weights(4, 6, rng);
        for (const auto& prior : {PriorSpec::dense(random_spd(6, rng)), PriorSpec::circulant(inverse_frequency_profile(6))}) {
            const auto sys = assemble_m_step(w, batch, prior);
            const auto [A, b] = oracle::dense_m_step(w, batch.samples, 6, 3, 0.7, prior.precision_matrix());
            CHECK((sys.A - A).cwiseAbs().maxCoeff() <= 1e-10 * (1 + A.cwiseAbs().maxCoeff()));
            CHECK((sys.b - b).cwiseAbs().maxCoeff() <= 1e-10 * (1 + b.cwiseAbs().maxCoeff()));

            const HighResSignal next = m_step(w, batch, prior);
            CHECK((sys.A * next.values() - sys.b).norm() <= 1e-9 * (1 + sys.b.norm()));
        }
    }
}

TEST_CASE("M-step with L=M and uniform weights") {
    std::mt19937_64 rng(3);
    const int M = 5;
    const int N = 7;
    const double sigma = 0.5;
    const auto batch = noisy_batch(oracle::gaussian_vector(M, rng), M, sigma, N, 1);
    const RowMatrix w = RowMatrix::Constant(N, M, 1.0 / M);
    const Matrix P = random_spd(M, rng);
    const auto sys = assemble_m_step(w, batch, PriorSpec::dense(P));
    const Matrix expected = P + (N / (sigma * sigma)) * Matrix::Identity(M, M);
    CHECK((sys.A - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("e_step rows are probability vectors") {
    std::mt19937_64 rng(4);
    const Vector truth = oracle::gaussian_vector(12, rng);
    const auto batch = noisy_batch(truth, 4, 1.0, 30, 2);
    const RowMatrix w = e_step(HighResSignal(oracle::gaussian_vector(12, rng)), batch);
    CHECK(w.minCoeff() >= 0.0);
    CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);

    const RowMatrix flat = e_step(HighResSignal(Vector::Zero(12)), batch);
    CHECK((flat.array() - 1.0 / 12).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("e_step is one-hot on the matching hypotheses at high SNR") {
    std::mt19937_64 rng(5);
    const int M = 12;
    const int L = 4;
    const Vector x = oracle::gaussian_vector(M, rng);
    ObservationBatch batch;
    batch.params = ModelParams{M, L, 1e-3, 1, 0};
    batch.samples = sample_grid(x, L, 5).transpose();
    const RowMatrix w = e_step(HighResSignal(x), batch);
    // for generic x only s = 5 reproduces the sample
    CHECK(w(0, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.row(0).sum() - w(0, 5) <= 1e-12);

    const double ll = log_likelihood(HighResSignal(x), batch);
    CHECK(ll == doctest::Approx(-std::log(M)).epsilon(1e-9));
}

TEST_CASE("e_step spreads weight over coinciding hypotheses") {
    const int M = 8;
    const int L = 4;
    Vector x(M);
    x << 1, 5, 2, 5, 3, 5, 4, 5;  // odd sub-signal constant
    ObservationBatch batch;
    batch.params = ModelParams{M, L, 1e-3, 1, 0};
    batch.samples = sample_grid(x, L, 1).transpose();  // picks the constant sub-signal
    const RowMatrix w = e_step(HighResSignal(x), batch);
    for (int s = 0; s < M; ++s) {
        const bool match = (sample_grid(x, L, s) - sample_grid(x, L, 1)).norm() == 0.0;
        CHECK(w(0, s) == doctest::Approx(match ? 0.25 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("likelihood is invariant on the orbit (K=2, L=3)") {
    std::mt19937_64 rng(6);
    const Vector truth = oracle::gaussian_vector(6, rng);
    const auto batch = noisy_batch(truth, 3, 0.5, 10, 3);
    const Vector x = oracle::gaussian_vector(6, rng);
    const double ref = log_likelihood(HighResSignal(x), batch);
    for (std::uint64_t i = 0; i < *orbit_size(2, 3); ++i) {
        const Vector gx = apply_orbit_element(x, orbit_element_at(i, 2, 3), 3);
        CHECK(std::abs(log_likelihood(HighResSignal(gx), batch) - ref) <= 1e-9 * std::abs(ref));
    }
}

TEST_CASE("log_posterior conventions") {
    std::mt19937_64 rng(7);
    const auto batch = noisy_batch(oracle::gaussian_vector(8, rng), 4, 1.0, 6, 4);
    const HighResSignal x(oracle::gaussian_vector(8, rng));
    const auto tiny = PriorSpec::dense(1e-300 * Matrix::Identity(8, 8));
    CHECK(log_posterior(x, batch, tiny) == doctest::Approx(log_likelihood(x, batch)).epsilon(1e-14));
    const auto prior = PriorSpec::circulant(inverse_frequency_profile(8));
    const HighResSignal zero(Vector::Zero(8));
    CHECK(log_posterior(zero, batch, prior) == log_likelihood(zero, batch));
    CHECK(log_posterior(x, batch, prior) ==
          doctest::Approx(log_likelihood(x, batch) - 0.5 * x.values().dot(prior.precision_matrix() * x.values()))
              .epsilon(1e-12));
}

TEST_CASE("noise-free sigma is rejected") {
    const auto batch = noisy_batch(Vector::Ones(4), 2, 0.0, 3, 0);
    CHECK_THROWS_AS(log_likelihood(HighResSignal(Vector::Ones(4)), batch), ConfigError);
    CHECK_THROWS_AS(e_step(HighResSignal(Vector::Ones(4)), batch), ConfigError);
}

TEST_CASE("EMConfig validation") {
    EMConfig c;
    CHECK_NOTHROW(c.validate());
    c.tol = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.restarts = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("EM traces are non-decreasing") {
    std::mt19937_64 rng(8);
    for (double sigma : {0.1, 1.0, 3.0}) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto batch = noisy_batch(oracle::gaussian_vector(12, rng), 6, sigma, 50, trial);
            EMConfig config;
            config.restarts = 2;
            config.seed = trial;
            const auto prior = PriorSpec::circulant(inverse_frequency_profile(12));
            const auto result = run_em(batch, prior, config);
            const auto& t = result.log_posterior_trace;
            REQUIRE(t.size() == static_cast<std::size_t>(result.iterations) + 1);
            for (std::size_t i = 1; i < t.size(); ++i) {
                CHECK(t[i] >= t[i - 1] - 1e-9 * std::abs(t[i - 1]));
            }
            CHECK(result.restart_log_posteriors.size() == 2u);
            CHECK(t.back() == *std::max_element(result.restart_log_posteriors.begin(),
                                                result.restart_log_posteriors.end()));
        }
    }
}

TEST_CASE("EM recovers a signal at low noise without downsampling") {
    Rng rng = make_stream(9, 0);
    const HighResSignal x = sample_prior(PriorSpec::circulant(flat_profile(16)), 16, rng);
    const auto batch = generate_batch(x, ModelParams{16, 16, 0.1, 200, 9});
    EMConfig config;
    config.restarts = 3;
    const auto result = run_em(batch, PriorSpec::circulant(flat_profile(16)), config);
    CHECK(relative_error(result.estimate, x).error <= 0.05);
}

TEST_CASE("EM is deterministic for a fixed seed") {
    std::mt19937_64 rng(10);
    const auto batch = noisy_batch(oracle::gaussian_vector(12, rng), 6, 0.5, 40, 1);
    EMConfig config;
    config.restarts = 3;
    config.seed = 77;
    const auto prior = PriorSpec::circulant(flat_profile(12));
    const auto a = run_em(batch, prior, config);
    const auto b = run_em(batch, prior, config);
    CHECK(a.estimate.values() == b.estimate.values());
    CHECK(a.log_posterior_trace == b.log_posterior_trace);
    CHECK(a.restart_index == b.restart_index);
}

TEST_CASE("bandlimit projection keeps iterates in band") {
    Rng rng = make_stream(11, 0);
    const HighResSignal x = sample_bandlimited_signal(24, 3, rng);
    const auto batch = generate_batch(x, ModelParams{24, 6, 0.5, 100, 11});
    EMConfig config;
    config.bandlimit = 3;
    const auto result = run_em(batch, PriorSpec::circulant(flat_profile(24)), config);
    const CVector xh = dft(result.estimate.values());
    for (int k = 4; k <= 20; ++k) {
        CHECK(std::abs(xh[k]) <= 1e-9 * xh.norm());
    }
}

TEST_CASE("relative_error examples") {
    std::mt19937_64 rng(12);
    const HighResSignal x(oracle::gaussian_vector(20, rng));
    CHECK(relative_error(x, x).error <= 1e-14);
    const auto shifted = relative_error(HighResSignal(circular_shift(x.values(), 7)), x);
    CHECK(shifted.error <= 1e-14);
    CHECK((circular_shift(circular_shift(x.values(), 7), shifted.shift) - x.values()).norm() <= 1e-12);
    CHECK(relative_error(HighResSignal(Vector::Zero(20)), x).error == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_error(x, HighResSignal(Vector::Zero(20))), NumericalError);

    for (int trial = 0; trial < 10; ++trial) {
        const Vector est = oracle::gaussian_vector(20, rng);
        CHECK(relative_error(HighResSignal(est), x).error ==
              doctest::Approx(oracle::brute_relative_error(est, x.values())).epsilon(1e-10));
    }
}

TEST_CASE("per_frequency_error examples") {
    std::mt19937_64 rng(13);
    const int M = 16;
    const HighResSignal x(oracle::gaussian_vector(M, rng));
    const auto same = per_frequency_error(x, x);
    REQUIRE(same.size() == 9u);
    for (const auto& e : same) {
        REQUIRE(e.has_value());
        CHECK(*e <= 1e-12);
    }

    CVector xh = dft(x.values());
    xh[3] = 0;
    xh[M - 3] = 0;
    const auto dropped = per_frequency_error(HighResSignal(idft_real(xh)), x);
    for (int k = 0; k <= M / 2; ++k) {
        CHECK(*dropped[k] == doctest::Approx(k == 3 ? 1.0 : 0.0).epsilon(1e-9));
    }

    Rng r = make_stream(13, 1);
    const HighResSignal band = sample_bandlimited_signal(60, 10, r);
    const auto lp = per_frequency_error(low_pass(band, 3), band);
    REQUIRE(lp.size() == 31u);
    for (int k = 0; k <= 30; ++k) {
        if (k <= 3) {
            CHECK(*lp[k] <= 1e-9);
        } else if (k <= 10) {
            CHECK(*lp[k] == doctest::Approx(1.0).epsilon(1e-9));
        } else {
            CHECK_FALSE(lp[k].has_value());
        }
    }
}

TEST_CASE("high-SNR error scales like SNR^-1/2") {
    const int M = 16;
    const int L = 8;
    const auto prior = PriorSpec::circulant(inverse_frequency_profile(M));
    double err10 = 0.0;
    double err100 = 0.0;
    const int trials = 8;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng = make_stream(14, trial);
        const HighResSignal x = sample_prior(prior, M, rng);
        // With K=2 the likelihood cannot tell orbit members apart; the
        // estimator targets the member the prior prefers.
        const HighResSignal target = orbit_select_map(x, L, prior).best;
        for (double snr : {10.0, 100.0}) {
            const auto batch = generate_batch(x, ModelParams{M, L, 1.0 / std::sqrt(snr), 100, 100u + trial});
            EMConfig config;
            config.restarts = 10;
            config.seed = trial;
            const double e = relative_error(run_em(batch, prior, config).estimate, target).error;
            (snr == 10.0 ? err10 : err100) += std::log(e) / trials;
        }
    }
    const double ratio = std::exp(err100 - err10);
    MESSAGE("geometric-mean error ratio " << ratio);
    CHECK(ratio >= std::sqrt(0.1) / 2.5);
    CHECK(ratio <= std::sqrt(0.1) * 2.5);
}
