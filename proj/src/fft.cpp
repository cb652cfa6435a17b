#include "sipkit/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace sipkit {

namespace {
// The FFTW planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> fft2d(const std::vector<std::complex<double>>& data, std::size_t rows,
                                        std::size_t cols, bool inverse) {
  std::vector<std::complex<double>> out(rows * cols);
  std::vector<std::complex<double>> in(data);
  auto* in_ptr = reinterpret_cast<fftw_complex*>(in.data());
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), in_ptr, out_ptr,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace sipkit
