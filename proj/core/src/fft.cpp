#include "uwisac/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace uwisac::fft {
namespace {

std::mutex g_plan_mutex;

struct PlanCache {
  std::map<std::pair<int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

fftw_plan get_plan(int n, int sign) {
  static PlanCache cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.plans.find(key);
  if (it != cache.plans.end()) return it->second;
  fftw_complex* a = fftw_alloc_complex(static_cast<size_t>(n));
  fftw_complex* b = fftw_alloc_complex(static_cast<size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  cache.plans.emplace(key, p);
  return p;
}

void run(const cd* in, cd* out, int n, int sign) {
  if (n <= 0) return;
  fftw_plan p = get_plan(n, sign);
  // FFTW wants non-const input; the plan is out-of-place so it is not written
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cd*>(in));
  auto* dst = reinterpret_cast<fftw_complex*>(out);
  if (in == out) {
    CVec tmp(n);
    fftw_execute_dft(p, src, reinterpret_cast<fftw_complex*>(tmp.data()));
    for (int i = 0; i < n; ++i) out[i] = tmp[i];
  } else {
    fftw_execute_dft(p, src, dst);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) out[i] *= s;
}

}  // namespace

void forward(const cd* in, cd* out, int n) { run(in, out, n, FFTW_FORWARD); }
void inverse(const cd* in, cd* out, int n) { run(in, out, n, FFTW_BACKWARD); }

CVec forward(const CVec& x) {
  CVec y(x.size());
  forward(x.data(), y.data(), static_cast<int>(x.size()));
  return y;
}

CVec inverse(const CVec& x) {
  CVec y(x.size());
  inverse(x.data(), y.data(), static_cast<int>(x.size()));
  return y;
}

CMat forward_cols(const CMat& x) {
  CMat y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    forward(x.col(c).data(), y.col(c).data(), static_cast<int>(x.rows()));
  return y;
}

CMat inverse_cols(const CMat& x) {
  CMat y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    inverse(x.col(c).data(), y.col(c).data(), static_cast<int>(x.rows()));
  return y;
}

}  // namespace uwisac::fft
