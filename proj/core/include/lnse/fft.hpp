#pragma once

// Thin cached wrapper around FFTW complex-to-complex 3D transforms.
// Convention matches SpectralField: backward transform synthesizes
// f(x_j) = sum c(xi) exp(+2 pi i xi . x_j); forward analysis divides by the
// number of grid points so that from_physical(to_physical(f)) == f.

#include <complex>
#include <vector>

namespace lnse {

// sign = -1: analysis (forward, scaled by 1/N), sign = +1: synthesis.
void fft3(std::vector<std::complex<double>>& data, int n0, int n1, int n2, int sign);
void fft1(std::vector<std::complex<double>>& data, int sign);
void fft2(std::vector<std::complex<double>>& data, int n0, int n1, int sign);

}  // namespace lnse
