#include "modlab/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace modlab::detail {

void init_fft_threading() {
  static std::once_flag once;
  std::call_once(once, [] { fftw_make_planner_thread_safe(); });
}

}  // namespace modlab::detail
