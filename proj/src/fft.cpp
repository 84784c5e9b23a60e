#include "vapor/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "vapor/error.hpp"

namespace vapor::fft {
namespace {

using PlanKey = std::tuple<int, std::size_t, int>;  // rank, n, sign

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int rank, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const PlanKey key{rank, n, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    // FFTW_ESTIMATE never touches the buffer contents during planning.
    const std::size_t total = rank == 1 ? n : n * n;
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan =
        rank == 1
            ? fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, flags)
            : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf,
                               buf, sign, flags);
    if (plan == nullptr) fail(ErrorCode::InvalidArgument, "fftw planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

int sign_of(Direction dir) {
  return dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
}

}  // namespace

void transform_1d(std::span<std::complex<double>> data, Direction dir) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(1, data.size(), sign_of(dir));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void transform_2d(std::span<std::complex<double>> data, std::size_t n,
                  Direction dir) {
  require(data.size() == n * n, "transform_2d: buffer is not n*n");
  if (n == 0) return;
  fftw_plan plan = cache().get(2, n, sign_of(dir));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace vapor::fft
