#pragma once

// Thin FFTW3 wrapper: unnormalized in-place complex transforms with a
// process-wide plan cache. Execution uses the new-array interface, so plans
// are created with FFTW_UNALIGNED.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "smlab/error.hpp"

namespace smlab::fft {

using cplx = std::complex<double>;

enum class Sign { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

// (dims, howmany, stride, dist, sign)
using PlanKey = std::tuple<std::vector<int>, int, int, int, int>;

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  fftw_plan get(const std::vector<int>& dims, int howmany, int stride, int dist, Sign sign) {
    PlanKey key{dims, howmany, stride, dist, static_cast<int>(sign)};
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    // scratch must span the full strided footprint
    const std::size_t span = (total - 1) * stride + static_cast<std::size_t>(howmany - 1) * dist + 1;
    std::vector<cplx> scratch(span);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), howmany, p, nullptr, stride,
                                        dist, p, nullptr, stride, dist, static_cast<int>(sign),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, ErrorCode::invalid_argument, "fftw plan creation failed");
    plans_.emplace(std::move(key), plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace detail

// Contiguous multi-dimensional transform of `data` (row-major dims).
inline void transform(cplx* data, const std::vector<int>& dims, Sign sign) {
  fftw_plan p = detail::PlanCache::instance().get(dims, 1, 1, 0, sign);
  auto* q = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, q, q);
}

// `howmany` contiguous transforms of shape dims, consecutive blocks.
inline void transform_batch(cplx* data, const std::vector<int>& dims, int howmany, Sign sign) {
  int block = 1;
  for (int d : dims) block *= d;
  fftw_plan p = detail::PlanCache::instance().get(dims, howmany, 1, block, sign);
  auto* q = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, q, q);
}

// 1-D transforms of length n along a strided axis: element i of line l is
// data[l + i * stride] for l in [0, lines).
inline void transform_strided(cplx* data, int n, int lines, int stride, Sign sign) {
  fftw_plan p = detail::PlanCache::instance().get({n}, lines, stride, 1, sign);
  auto* q = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, q, q);
}

}  // namespace smlab::fft
