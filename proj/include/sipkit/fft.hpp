#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace sipkit {

// Unnormalized 2-D DFT of a row-major rows x cols array (FFTW backed).
// The inverse transform is also unnormalized.
std::vector<std::complex<double>> fft2d(const std::vector<std::complex<double>>& data, std::size_t rows,
                                        std::size_t cols, bool inverse = false);

}  // namespace sipkit
