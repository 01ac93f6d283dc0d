#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"

using namespace srmra;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

}  // namespace

TEST_CASE("circular_shift follows the index formula") {
    const Vector z = vec({1, 2, 3, 4});
    CHECK(circular_shift(z, 0) == vec({1, 2, 3, 4}));
    CHECK(circular_shift(z, 1) == vec({4, 1, 2, 3}));
    CHECK(circular_shift(z, 5) == vec({4, 1, 2, 3}));
    CHECK(circular_shift(z, -1) == vec({2, 3, 4, 1}));
}

TEST_CASE("circular shifts compose additively for every length up to 64") {
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 64; ++n) {
        const Vector z = oracle::gaussian_vector(n, rng);
        for (int a = 0; a < n; ++a) {
            const Vector za = circular_shift(z, a);
            CHECK(za.norm() == doctest::Approx(z.norm()).epsilon(1e-15));
            for (int b = 0; b < n; b += (n > 16 ? 5 : 1)) {
                REQUIRE(circular_shift(za, b) == circular_shift(z, a + b));
            }
        }
    }
}

TEST_CASE("sampling examples") {
    const Vector x = vec({10, 20, 30, 40});  // a, b, c, d
    CHECK(sample_grid(x, 2, 1) == vec({40, 20}));
    CHECK(sample_grid(x, 4, 0) == x);
    // s and s + 2 give circular shifts of each other on the L-grid.
    for (int s = 0; s < 4; ++s) {
        CHECK(sample_grid(x, 2, s + 2) == circular_shift(sample_grid(x, 2, s), 1));
    }
}

TEST_CASE("sub-sampling commutes with K-step shifts") {
    std::mt19937_64 rng(11);
    for (int M = 1; M <= 24; ++M) {
        const Vector x = oracle::gaussian_vector(M, rng);
        for (int L = 1; L <= M; ++L) {
            if (M % L != 0) {
                continue;
            }
            const int K = M / L;
            const Vector px = sample_grid(x, L, 0);
            for (int c = 0; c < 2 * L; ++c) {
                REQUIRE(sample_grid(circular_shift(x, static_cast<long long>(c) * K), L, 0) ==
                        circular_shift(px, c));
                REQUIRE(sample_grid(x, L, static_cast<long long>(c) * K) == circular_shift(px, c));
            }
        }
    }
}

TEST_CASE("model parameters are validated") {
    ModelParams p{12, 5, 0.0, 3, 0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.L = 4;
    CHECK_NOTHROW(p.validate());
    p.sigma = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("sample_observation and generate_batch") {
    std::mt19937_64 seed_rng(3);
    const HighResSignal x(oracle::gaussian_vector(12, seed_rng));
    const ModelParams params{12, 4, 0.0, 3, 99};

    SUBCASE("dimension mismatch is rejected") {
        ModelParams wrong = params;
        wrong.M = 8;
        wrong.L = 4;
        Rng rng(1);
        CHECK_THROWS_AS(sample_observation(x, wrong, rng), ConfigError);
        CHECK_THROWS_AS(generate_batch(x, wrong), ConfigError);
    }

    SUBCASE("rows equal the per-observation streams") {
        const ObservationBatch batch = generate_batch(x, params);
        REQUIRE(batch.N() == 3);
        for (int i = 0; i < 3; ++i) {
            Rng rng = observation_stream(params.seed, static_cast<std::uint64_t>(i));
            const auto [y, s] = sample_observation(x, params, rng);
            CHECK(Vector(batch.samples.row(i).transpose()) == y);
            CHECK((*batch.true_shifts)[i] == s);
        }
    }

    SUBCASE("noiseless rows are templates") {
        ModelParams many = params;
        many.N = 200;
        const ObservationBatch batch = generate_batch(x, many);
        for (int i = 0; i < batch.N(); ++i) {
            bool found = false;
            for (int s = 0; s < 12 && !found; ++s) {
                found = Vector(batch.samples.row(i).transpose()) == sample_grid(x.values(), 4, s);
            }
            CHECK(found);
            CHECK(Vector(batch.samples.row(i).transpose()) == sample_grid(x.values(), 4, (*batch.true_shifts)[i]));
        }
    }

    SUBCASE("identical seeds give bit-identical batches") {
        ModelParams noisy = params;
        noisy.sigma = 0.7;
        noisy.N = 50;
        const ObservationBatch a = generate_batch(x, noisy);
        const ObservationBatch b = generate_batch(x, noisy);
        CHECK(a.samples == b.samples);
        CHECK(*a.true_shifts == *b.true_shifts);
        noisy.seed += 1;
        CHECK(generate_batch(x, noisy).samples != a.samples);
    }

    SUBCASE("shifts cover every residue") {
        ModelParams many = params;
        many.N = 2000;
        const ObservationBatch batch = generate_batch(x, many);
        std::set<int> seen(batch.true_shifts->begin(), batch.true_shifts->end());
        CHECK(seen.size() == 12);
    }
}

TEST_CASE("noise variance matches sigma^2") {
    const HighResSignal zero(Vector::Zero(8));
    const ModelParams params{8, 4, 1.0, 100000, 5};
    const ObservationBatch batch = generate_batch(zero, params);
    const double n = static_cast<double>(batch.samples.size());
    const double mean = batch.samples.sum() / n;
    const double var = (batch.samples.array() - mean).square().sum() / (n - 1.0);
    const double se = std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(var - 1.0) < 3.0 * se);
}

TEST_CASE("dft conventions") {
    CHECK((dft(Vector(vec({1, 0, 0, 0}))) - CVector::Ones(4)).norm() < 1e-15);
    CVector expected = CVector::Zero(4);
    expected[0] = 4.0;
    CHECK((dft(Vector(vec({1, 1, 1, 1}))) - expected).norm() < 1e-15);
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 40; ++n) {
        const Vector z = oracle::gaussian_vector(n, rng);
        CHECK((idft_real(dft(z)) - z).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((dft(z) - oracle::naive_dft(z)).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + z.norm() * n));
    }
}

TEST_CASE("bandlimited signals") {
    Rng rng(23);
    SUBCASE("B = 0 is constant") {
        const HighResSignal x = sample_bandlimited_signal(9, 0, rng);
        CHECK((x.values().array() - x[0]).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("full band for odd M") {
        const HighResSignal x = sample_bandlimited_signal(9, 4, rng);
        const CVector xh = dft(x.values());
        CHECK(xh.cwiseAbs().minCoeff() > 1e-6);
    }
    SUBCASE("bandlimit invariant and normalization") {
        const HighResSignal x = sample_bandlimited_signal(120, 15, rng);
        REQUIRE(x.bandlimit() == 15);
        const CVector xh = dft(x.values());
        for (int k = 16; k < 120 - 15; ++k) {
            CHECK(std::abs(xh[k]) < 1e-9 * x.values().norm());
        }
        CHECK(x.values().squaredNorm() == doctest::Approx(120.0).epsilon(1e-12));
        // SNR = ||x||^2 / (M sigma^2) = 1/sigma^2 after normalization.
        const double sigma = 0.37;
        CHECK(x.values().squaredNorm() / (120.0 * sigma * sigma) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-12));
    }
    SUBCASE("B too large") {
        CHECK_THROWS_AS(sample_bandlimited_signal(8, 4, rng), ConfigError);
    }
    SUBCASE("out-of-band energy is rejected") {
        Vector v = Vector::Zero(8);
        v[0] = 1.0;
        CHECK_THROWS_AS(HighResSignal(v, 1), ConfigError);
        CHECK_THROWS_AS(HighResSignal(Vector(vec({1.0, NAN}))), ConfigError);
    }
}

namespace {

// Entrywise 3-standard-error check of the empirical covariance against `expected`.
void check_covariance(const std::vector<Vector>& draws, const Matrix& expected) {
    const auto M = expected.rows();
    const double n = static_cast<double>(draws.size());
    for (Eigen::Index i = 0; i < M; ++i) {
        for (Eigen::Index j = i; j < M; ++j) {
            double sum = 0.0;
            double sum2 = 0.0;
            for (const auto& d : draws) {
                const double p = d[i] * d[j];
                sum += p;
                sum2 += p * p;
            }
            const double mean = sum / n;
            const double se = std::sqrt((sum2 / n - mean * mean) / n);
            CHECK_MESSAGE(std::abs(mean - expected(i, j)) < 3.0 * se, "entry (" << i << "," << j << ")");
        }
    }
}

}  // namespace

TEST_CASE("prior sampling") {
    const int M = 6;
    const int draws = 10000;
    SUBCASE("flat circulant profile gives identity covariance") {
        const PriorSpec prior = PriorSpec::circulant(flat_profile(M));
        std::vector<Vector> xs;
        for (int t = 0; t < draws; ++t) {
            Rng rng = make_stream(31, static_cast<std::uint64_t>(t));
            xs.push_back(sample_prior(prior, M, rng, Normalize::no).values());
        }
        check_covariance(xs, Matrix::Identity(M, M));
    }
    SUBCASE("dense identity precision") {
        const PriorSpec prior = PriorSpec::dense(Matrix::Identity(M, M));
        std::vector<Vector> xs;
        for (int t = 0; t < draws; ++t) {
            Rng rng = make_stream(37, static_cast<std::uint64_t>(t));
            xs.push_back(sample_prior(prior, M, rng, Normalize::no).values());
        }
        check_covariance(xs, Matrix::Identity(M, M));
    }
    SUBCASE("dense non-identity precision") {
        std::mt19937_64 rng0(41);
        Matrix G(M, M);
        for (int i = 0; i < M; ++i) {
            G.row(i) = oracle::gaussian_vector(M, rng0).transpose();
        }
        const Matrix precision = G * G.transpose() + Matrix::Identity(M, M);
        const PriorSpec prior = PriorSpec::dense(precision);
        std::vector<Vector> xs;
        for (int t = 0; t < draws; ++t) {
            Rng rng = make_stream(43, static_cast<std::uint64_t>(t));
            xs.push_back(sample_prior(prior, M, rng, Normalize::no).values());
        }
        check_covariance(xs, precision.inverse());
    }
    SUBCASE("1/f profile halves power per octave") {
        const int n = 16;
        const PriorSpec prior = PriorSpec::circulant(inverse_frequency_profile(n));
        CHECK(prior.power_profile().sum() == doctest::Approx(n).epsilon(1e-12));
        Vector power = Vector::Zero(n);
        for (int t = 0; t < draws; ++t) {
            Rng rng = make_stream(47, static_cast<std::uint64_t>(t));
            power += dft(sample_prior(prior, n, rng, Normalize::no).values()).cwiseAbs2();
        }
        for (int f : {1, 2, 4}) {
            CHECK(power[f] / power[2 * f] == doctest::Approx(2.0).epsilon(0.10));
        }
    }
    SUBCASE("normalized draws have energy M") {
        const PriorSpec prior = PriorSpec::circulant(inverse_frequency_profile(M));
        Rng rng(5);
        CHECK(sample_prior(prior, M, rng).values().squaredNorm() == doctest::Approx(M).epsilon(1e-12));
    }
}

TEST_CASE("prior validation") {
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(PriorSpec::dense(bad), ConfigError);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(PriorSpec::dense(asym), ConfigError);
    CHECK_THROWS_AS(PriorSpec::circulant(vec({1.0, 2.0, 3.0})), ConfigError);
    CHECK_THROWS_AS(PriorSpec::circulant(vec({1.0, 0.0, 0.0})), ConfigError);
    CHECK_NOTHROW(PriorSpec::circulant(vec({1.0, 2.0, 2.0})));
    // The circulant precision matrix has eigenvalues 1 / profile.
    const PriorSpec c = PriorSpec::circulant(vec({1.0, 2.0, 4.0, 2.0}));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.precision_matrix());
    Vector expected = vec({0.25, 0.5, 0.5, 1.0});
    CHECK((eig.eigenvalues() - expected).norm() < 1e-12);
}
