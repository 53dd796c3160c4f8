#pragma once

// Thin FFTW wrapper: in-place d-dimensional complex transforms on cubic
// arrays, with a process-wide plan cache. Plans are built with
// FFTW_ESTIMATE so the chosen algorithm (and hence every rounding) is the
// same from run to run.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <tuple>
#include <vector>

#include "modnls/error.hpp"

namespace modnls {

using cplx = std::complex<double>;

template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}  // NOLINT

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    const std::size_t bytes = ((n * sizeof(T) + alignment - 1) / alignment) * alignment;
    void* p = std::aligned_alloc(alignment, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVector = std::vector<cplx, AlignedAllocator<cplx>>;

namespace detail {

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rank, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rank, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    std::vector<int> dims(static_cast<std::size_t>(rank), n);
    for (int i = 0; i < rank; ++i) total *= static_cast<std::size_t>(n);
    CVector scratch(total);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(rank, dims.data(), data, data, sign, FFTW_ESTIMATE);
    if (!plan) throw Error("FFTW failed to build a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized forward DFT, in place: c_j = sum_m f_m exp(-2 pi i j.m / n).
inline void fft_forward(CVector& data, int rank, int n) {
  if (n == 1) return;
  fftw_plan plan = detail::PlanCache::instance().get(rank, n, FFTW_FORWARD);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

/// Normalized inverse DFT, in place (divides by n^rank).
inline void fft_inverse(CVector& data, int rank, int n) {
  if (n == 1) return;
  fftw_plan plan = detail::PlanCache::instance().get(rank, n, FFTW_BACKWARD);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace modnls
