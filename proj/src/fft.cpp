#include "h2dyn/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "h2dyn/error.hpp"

namespace h2dyn {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& thread_setting() {
  static int n = 1;
  return n;
}

void init_fftw_once() {
  static const bool done = [] {
    fftw_init_threads();
    fftw_make_planner_thread_safe();
    return true;
  }();
  (void)done;
}

}  // namespace

FftPlan::FftPlan(std::span<const int> dims, std::span<const int> axes,
                 FftDirection dir) {
  init_fftw_once();
  const int rank_total = static_cast<int>(dims.size());
  std::vector<std::ptrdiff_t> stride(dims.size(), 1);
  for (int a = rank_total - 2; a >= 0; --a) stride[a] = stride[a + 1] * dims[a + 1];

  std::vector<bool> transformed(dims.size(), false);
  for (int a : axes) {
    if (a < 0 || a >= rank_total) throw UsageError("FFT axis out of range");
    transformed[a] = true;
  }
  std::vector<fftw_iodim64> tdims, hdims;
  std::size_t total = 1;
  for (int a = 0; a < rank_total; ++a) {
    total *= static_cast<std::size_t>(dims[a]);
    fftw_iodim64 d{dims[a], stride[a], stride[a]};
    (transformed[a] ? tdims : hdims).push_back(d);
  }
  ComplexBuffer scratch(total);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan_with_nthreads(thread_setting());
  plan_ = fftw_plan_guru64_dft(static_cast<int>(tdims.size()), tdims.data(),
                               static_cast<int>(hdims.size()), hdims.data(), p, p,
                               dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                               FFTW_ESTIMATE);
  if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
}

FftPlan::~FftPlan() {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

void FftPlan::execute(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_), p, p);
}

const FftPlan& cached_plan(std::span<const int> dims, std::span<const int> axes,
                           FftDirection dir) {
  using Key = std::tuple<std::vector<int>, std::vector<int>, int, int>;
  static std::map<Key, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(planner_mutex());
  Key key{std::vector<int>(dims.begin(), dims.end()),
          std::vector<int>(axes.begin(), axes.end()), static_cast<int>(dir),
          thread_setting()};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<FftPlan>(dims, axes, dir)).first;
  }
  return *it->second;
}

void set_fft_threads(int n) {
  std::lock_guard lock(planner_mutex());
  thread_setting() = n < 1 ? 1 : n;
}

int fft_threads() { return thread_setting(); }

}  // namespace h2dyn
