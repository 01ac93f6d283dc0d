#include "srmra/fourier.hpp"

#include <unsupported/Eigen/FFT>

#include "srmra/errors.hpp"

namespace srmra {
namespace {

// Eigen::FFT caches plans internally and is not safe to share between threads.
Eigen::FFT<double>& engine() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}

}  // namespace

// kissfft does not handle length one.
void dft(const Complex* in, Complex* out, int n) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    engine().fwd(out, in, n);
}

void idft(const Complex* in, Complex* out, int n) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    engine().inv(out, in, n);
}

CVector dft(const Eigen::Ref<const Vector>& z) {
    return dft(CVector(z.cast<Complex>()));
}

CVector dft(const Eigen::Ref<const CVector>& z) {
    CVector out(z.size());
    if (z.size() > 0) {
        const CVector in = z;
        dft(in.data(), out.data(), static_cast<int>(in.size()));
    }
    return out;
}

CVector idft(const Eigen::Ref<const CVector>& zhat) {
    CVector out(zhat.size());
    if (zhat.size() > 0) {
        const CVector in = zhat;
        idft(in.data(), out.data(), static_cast<int>(in.size()));
    }
    return out;
}

Vector idft_real(const Eigen::Ref<const CVector>& zhat) {
    return idft(zhat).real();
}

Vector project_bandlimit(const Eigen::Ref<const Vector>& z, int bandlimit) {
    require(bandlimit >= 0, "bandlimit must be non-negative");
    const auto n = z.size();
    CVector zhat = dft(z);
    for (Eigen::Index k = bandlimit + 1; k < n - bandlimit; ++k) {
        zhat[k] = 0.0;
    }
    return idft_real(zhat);
}

}  // namespace srmra
