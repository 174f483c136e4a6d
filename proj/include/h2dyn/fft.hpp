#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace h2dyn {

using cplx = std::complex<double>;

/// 64-byte aligned storage so every buffer matches the alignment the FFT
/// plans were created with.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;
using RealBuffer = std::vector<double, AlignedAllocator<double>>;

enum class FftDirection { forward, backward };

/// Unnormalized in-place DFT along a subset of the axes of a row-major array.
/// forward uses exp(-i k x), backward exp(+i k x).
class FftPlan {
 public:
  FftPlan(std::span<const int> dims, std::span<const int> axes, FftDirection dir);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void execute(cplx* data) const;

 private:
  void* plan_ = nullptr;
};

/// Process-wide plan cache; planning is serialized, execution is reentrant.
const FftPlan& cached_plan(std::span<const int> dims, std::span<const int> axes,
                           FftDirection dir);

/// Worker threads used by plans created after the call.
void set_fft_threads(int n);
int fft_threads();

}  // namespace h2dyn
