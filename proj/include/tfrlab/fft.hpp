#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>

#include "tfrlab/common.hpp"

namespace tfrlab::fft {

// FFTW's planner is not re-entrant; plan execution on fresh arrays is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using Buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
Buffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * (n == 0 ? 1 : n)));
  if (p == nullptr) throw std::bad_alloc();
  return Buffer<T>(p);
}

class Plan {
 public:
  Plan() = default;
  explicit Plan(fftw_plan p) : plan_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  Plan(Plan&& o) noexcept : plan_(o.plan_) { o.plan_ = nullptr; }
  Plan& operator=(Plan&& o) noexcept {
    std::swap(plan_, o.plan_);
    return *this;
  }
  ~Plan() {
    if (plan_ != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
  }
  [[nodiscard]] fftw_plan get() const { return plan_; }

 private:
  fftw_plan plan_ = nullptr;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

// Real-to-complex forward transform; returns the M/2+1 non-negative frequency bins.
inline std::vector<cplx> forward_real(std::span<const double> x) {
  const std::size_t m = x.size();
  auto in = allocate<double>(m);
  auto out = allocate<cplx>(m / 2 + 1);
  std::copy(x.begin(), x.end(), in.get());
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = Plan(fftw_plan_dft_r2c_1d(static_cast<int>(m), in.get(), as_fftw(out.get()), FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  return {out.get(), out.get() + m / 2 + 1};
}

// Unnormalised complex backward transform plan of fixed size, reusable across threads
// through execute() with caller-owned aligned buffers.
class Backward {
 public:
  explicit Backward(std::size_t m) : m_(m) {
    auto in = allocate<cplx>(m);
    auto out = allocate<cplx>(m);
    std::lock_guard lock(planner_mutex());
    plan_ = Plan(fftw_plan_dft_1d(static_cast<int>(m), as_fftw(in.get()), as_fftw(out.get()), FFTW_BACKWARD, FFTW_ESTIMATE));
  }
  [[nodiscard]] std::size_t size() const { return m_; }
  void execute(cplx* in, cplx* out) const { fftw_execute_dft(plan_.get(), as_fftw(in), as_fftw(out)); }

 private:
  std::size_t m_;
  Plan plan_;
};

// Smallest size >= n whose prime factors are 2, 3, 5, 7.
inline std::size_t fast_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace tfrlab::fft
