#include "srmra/invariants.hpp"

#include <cmath>

#include "srmra/errors.hpp"
#include "srmra/fourier.hpp"

namespace srmra {

Matrix autocorrelation(const Eigen::Ref<const Vector>& z, int q) {
    const auto L = z.size();
    require(L >= 1, "autocorrelation of an empty vector");
    switch (q) {
    case 1:
        return Matrix::Constant(1, 1, z.sum());
    case 2: {
        Matrix out = Matrix::Zero(L, 1);
        for (Eigen::Index l = 0; l < L; ++l) {
            for (Eigen::Index i = 0; i < L; ++i) {
                out(l, 0) += z[i] * z[(i + l) % L];
            }
        }
        return out;
    }
    case 3: {
        Matrix out = Matrix::Zero(L, L);
        for (Eigen::Index l1 = 0; l1 < L; ++l1) {
            for (Eigen::Index l2 = 0; l2 < L; ++l2) {
                double acc = 0.0;
                for (Eigen::Index i = 0; i < L; ++i) {
                    acc += z[i] * z[(i + l1) % L] * z[(i + l2) % L];
                }
                out(l1, l2) = acc;
            }
        }
        return out;
    }
    default:
        throw ConfigError("autocorrelation order must be 1, 2 or 3");
    }
}

namespace {

InvariantTriple triple_from_spectrum(const CVector& zhat) {
    const auto L = zhat.size();
    InvariantTriple t;
    t.mean = zhat[0].real();
    t.power_spectrum = zhat.cwiseAbs2();
    t.bispectrum.resize(L, L);
    for (Eigen::Index k1 = 0; k1 < L; ++k1) {
        for (Eigen::Index k2 = k1; k2 < L; ++k2) {
            const Complex value = zhat[k1] * zhat[k2] * zhat[wrap_index(-k1 - k2, L)];
            t.bispectrum(k1, k2) = value;
            t.bispectrum(k2, k1) = value;
        }
    }
    return t;
}

}  // namespace

InvariantTriple fourier_invariants(const Eigen::Ref<const Vector>& z) {
    require(z.size() >= 1, "invariants of an empty vector");
    return triple_from_spectrum(dft(z));
}

InvariantTriple mixed_invariants(const std::vector<Vector>& subs) {
    require(!subs.empty(), "no sub-signals");
    const auto L = subs.front().size();
    InvariantTriple avg;
    avg.power_spectrum = Vector::Zero(L);
    avg.bispectrum = CMatrix::Zero(L, L);
    for (const auto& s : subs) {
        require(s.size() == L, "sub-signals have different lengths");
        const InvariantTriple t = fourier_invariants(s);
        avg.mean += t.mean;
        avg.power_spectrum += t.power_spectrum;
        avg.bispectrum += t.bispectrum;
    }
    const double inv = 1.0 / static_cast<double>(subs.size());
    avg.mean *= inv;
    avg.power_spectrum *= inv;
    avg.bispectrum *= inv;
    return avg;
}

void InvariantAccumulator::Sum::add(double x) {
    const double t = value + x;
    if (std::abs(value) >= std::abs(x)) {
        compensation += (value - t) + x;
    } else {
        compensation += (x - t) + value;
    }
    value = t;
}

void InvariantAccumulator::Sum::merge(const Sum& other) {
    add(other.value);
    add(other.compensation);
}

void InvariantAccumulator::Moments::add(double x) {
    first.add(x);
    second.add(x * x);
}

void InvariantAccumulator::Moments::merge(const Moments& other) {
    first.merge(other.first);
    second.merge(other.second);
}

InvariantAccumulator::InvariantAccumulator(int L)
    : L_(L),
      power_(static_cast<std::size_t>(L)),
      bis_re_(static_cast<std::size_t>(L) * L),
      bis_im_(static_cast<std::size_t>(L) * L) {
    require(L >= 1, "L must be positive");
}

void InvariantAccumulator::add(const Eigen::Ref<const Vector>& y) {
    require(y.size() == L_, "observation length differs from accumulator length");
    const InvariantTriple t = fourier_invariants(y);
    mean_.add(t.mean);
    for (int k = 0; k < L_; ++k) {
        power_[k].add(t.power_spectrum[k]);
    }
    for (int k1 = 0; k1 < L_; ++k1) {
        for (int k2 = 0; k2 < L_; ++k2) {
            const auto idx = static_cast<std::size_t>(k1) * L_ + k2;
            bis_re_[idx].add(t.bispectrum(k1, k2).real());
            bis_im_[idx].add(t.bispectrum(k1, k2).imag());
        }
    }
    ++count_;
}

void InvariantAccumulator::merge(const InvariantAccumulator& other) {
    require(other.L_ == L_, "cannot merge accumulators of different length");
    mean_.merge(other.mean_);
    for (std::size_t i = 0; i < power_.size(); ++i) {
        power_[i].merge(other.power_[i]);
    }
    for (std::size_t i = 0; i < bis_re_.size(); ++i) {
        bis_re_[i].merge(other.bis_re_[i]);
        bis_im_[i].merge(other.bis_im_[i]);
    }
    count_ += other.count_;
}

InvariantTriple InvariantAccumulator::mean() const {
    require(count_ >= 1, "no observations accumulated");
    const double n = static_cast<double>(count_);
    InvariantTriple t;
    t.mean = mean_.first.total() / n;
    t.power_spectrum.resize(L_);
    t.bispectrum.resize(L_, L_);
    for (int k = 0; k < L_; ++k) {
        t.power_spectrum[k] = power_[k].first.total() / n;
    }
    for (int k1 = 0; k1 < L_; ++k1) {
        for (int k2 = 0; k2 < L_; ++k2) {
            const auto idx = static_cast<std::size_t>(k1) * L_ + k2;
            t.bispectrum(k1, k2) = Complex(bis_re_[idx].first.total() / n, bis_im_[idx].first.total() / n);
        }
    }
    return t;
}

InvariantStandardErrors InvariantAccumulator::standard_errors() const {
    require(count_ >= 2, "standard errors need at least two observations");
    const double n = static_cast<double>(count_);
    const auto se = [n](const Moments& m) {
        const double mu = m.first.total() / n;
        const double var = std::max(0.0, (m.second.total() - n * mu * mu) / (n - 1.0));
        return std::sqrt(var / n);
    };
    InvariantStandardErrors out;
    out.mean = se(mean_);
    out.power_spectrum.resize(L_);
    out.bispectrum_real.resize(L_, L_);
    out.bispectrum_imag.resize(L_, L_);
    for (int k = 0; k < L_; ++k) {
        out.power_spectrum[k] = se(power_[k]);
    }
    for (int k1 = 0; k1 < L_; ++k1) {
        for (int k2 = 0; k2 < L_; ++k2) {
            const auto idx = static_cast<std::size_t>(k1) * L_ + k2;
            out.bispectrum_real(k1, k2) = se(bis_re_[idx]);
            out.bispectrum_imag(k1, k2) = se(bis_im_[idx]);
        }
    }
    return out;
}

InvariantAccumulator accumulate_invariants(const ObservationBatch& batch) {
    require(batch.N() >= 1, "batch is empty");
    InvariantAccumulator acc(batch.L());
    for (int i = 0; i < batch.N(); ++i) {
        acc.add(batch.samples.row(i).transpose());
    }
    return acc;
}

InvariantTriple empirical_invariants(const ObservationBatch& batch) {
    return accumulate_invariants(batch).mean();
}

Matrix bias_pattern(int L) {
    require(L >= 1, "L must be positive");
    // Noise pairs (k2, -k1-k2), (k1, -k1-k2), (k1, k2) correlate iff
    // k1 = 0, k2 = 0, k1 + k2 = 0 (mod L) respectively.
    Matrix D = Matrix::Zero(L, L);
    for (int k1 = 0; k1 < L; ++k1) {
        for (int k2 = 0; k2 < L; ++k2) {
            D(k1, k2) = (k1 == 0 ? 1.0 : 0.0) + (k2 == 0 ? 1.0 : 0.0) + ((k1 + k2) % L == 0 ? 1.0 : 0.0);
        }
    }
    return D;
}

BiasTerms bias_terms(double xbar, double sigma, int L) {
    require(sigma >= 0.0, "sigma must be non-negative");
    const double s2 = sigma * sigma;
    BiasTerms b;
    b.xbar = xbar;
    b.b2 = Vector::Constant(L, s2 * L);
    b.b3 = bias_pattern(L) * (xbar * s2 * L * L);
    return b;
}

InvariantTriple debias(const InvariantTriple& triple, double sigma, int L) {
    require(sigma >= 0.0, "sigma must be non-negative");
    require(triple.L() == L, "triple length differs from L");
    if (sigma == 0.0) {
        return triple;
    }
    const BiasTerms b = bias_terms(triple.mean / L, sigma, L);
    InvariantTriple out = triple;
    out.power_spectrum -= b.b2;
    out.bispectrum -= b.b3.cast<Complex>();
    return out;
}

double invariant_distance(const InvariantTriple& a, const InvariantTriple& b, const InvariantWeights& weights) {
    require(a.L() == b.L() && a.bispectrum.rows() == b.bispectrum.rows() &&
                a.bispectrum.cols() == b.bispectrum.cols(),
            "invariant triples have different dimensions");
    require(weights.mean >= 0.0 && weights.power_spectrum >= 0.0 && weights.bispectrum >= 0.0,
            "weights must be non-negative");
    const double dm = a.mean - b.mean;
    return weights.mean * dm * dm + weights.power_spectrum * (a.power_spectrum - b.power_spectrum).squaredNorm() +
           weights.bispectrum * (a.bispectrum - b.bispectrum).squaredNorm();
}

}  // namespace srmra
