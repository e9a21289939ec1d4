#include "lnse/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace lnse {
namespace {

struct PlanEntry {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
  long n = 0;
};

std::mutex g_mutex;
std::map<std::tuple<int, int, int, int, int>, PlanEntry> g_plans;  // (rank,n0,n1,n2,sign)

PlanEntry& get_plan(int rank, int n0, int n1, int n2, int sign) {
  auto key = std::make_tuple(rank, n0, n1, n2, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  PlanEntry e;
  e.n = long(n0) * (rank > 1 ? n1 : 1) * (rank > 2 ? n2 : 1);
  e.buf = fftw_alloc_complex(e.n);
  if (!e.buf) throw std::bad_alloc();
  int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
  switch (rank) {
    case 1: e.plan = fftw_plan_dft_1d(n0, e.buf, e.buf, dir, FFTW_ESTIMATE); break;
    case 2: e.plan = fftw_plan_dft_2d(n0, n1, e.buf, e.buf, dir, FFTW_ESTIMATE); break;
    default: e.plan = fftw_plan_dft_3d(n0, n1, n2, e.buf, e.buf, dir, FFTW_ESTIMATE); break;
  }
  if (!e.plan) throw std::runtime_error("fftw plan creation failed");
  return g_plans.emplace(key, e).first->second;
}

void run(std::vector<std::complex<double>>& data, int rank, int n0, int n1, int n2, int sign) {
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = get_plan(rank, n0, n1, n2, sign);
  if (long(data.size()) != e.n) throw std::invalid_argument("fft: size mismatch");
  auto* src = reinterpret_cast<const double*>(data.data());
  auto* buf = reinterpret_cast<double*>(e.buf);
  for (long i = 0; i < 2 * e.n; ++i) buf[i] = src[i];
  fftw_execute(e.plan);
  auto* dst = reinterpret_cast<double*>(data.data());
  if (sign < 0) {
    const double scale = 1.0 / double(e.n);
    for (long i = 0; i < 2 * e.n; ++i) dst[i] = buf[i] * scale;
  } else {
    for (long i = 0; i < 2 * e.n; ++i) dst[i] = buf[i];
  }
}

}  // namespace

void fft3(std::vector<std::complex<double>>& data, int n0, int n1, int n2, int sign) {
  run(data, 3, n0, n1, n2, sign);
}
void fft2(std::vector<std::complex<double>>& data, int n0, int n1, int sign) {
  run(data, 2, n0, n1, 1, sign);
}
void fft1(std::vector<std::complex<double>>& data, int sign) {
  run(data, 1, int(data.size()), 1, 1, sign);
}

}  // namespace lnse
