#pragma once

#include "srmra/types.hpp"

namespace srmra {

// Unnormalized forward transform: zhat[k] = sum_n z[n] exp(-2 pi i k n / n_total).
// The inverse carries the 1/n_total factor, so idft(dft(z)) == z.

/// Raw-buffer transforms for hot loops; `in` and `out` must not alias.
void dft(const Complex* in, Complex* out, int n);
void idft(const Complex* in, Complex* out, int n);

CVector dft(const Eigen::Ref<const Vector>& z);
CVector dft(const Eigen::Ref<const CVector>& z);
CVector idft(const Eigen::Ref<const CVector>& zhat);

/// Real part of idft(zhat); for conjugate-symmetric spectra the imaginary
/// part is round-off only.
Vector idft_real(const Eigen::Ref<const CVector>& zhat);

/// Zeroes every coefficient with |k| > bandlimit (indices bandlimit+1 ..
/// n-bandlimit-1) and transforms back.
Vector project_bandlimit(const Eigen::Ref<const Vector>& z, int bandlimit);

}  // namespace srmra
