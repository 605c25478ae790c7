#include "osmoflow/fourier.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace osmoflow {

namespace {

// Cached FFTW plans per transform size. Plans are created with FFTW_ESTIMATE
// so planning does not touch the input arrays and results are deterministic.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> real;
  std::vector<std::complex<double>> spec;
};

std::mutex g_plan_mutex;
std::map<int, PlanPair>& plan_cache() {
  static std::map<int, PlanPair> cache;
  return cache;
}

PlanPair& plan_for(int n) {
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  PlanPair p;
  p.real.resize(n);
  p.spec.resize(n / 2 + 1);
  p.fwd = fftw_plan_dft_r2c_1d(n, p.real.data(),
                               reinterpret_cast<fftw_complex*>(p.spec.data()),
                               FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(p.spec.data()),
                               p.real.data(), FFTW_ESTIMATE);
  return cache.emplace(n, std::move(p)).first->second;
}

Eigen::ArrayXd spectral_derivative(const Eigen::ArrayXd& f, int order) {
  const int n = int(f.size());
  if (n % 2 != 0) throw std::invalid_argument("spectral derivative needs even n");
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  PlanPair& p = plan_for(n);
  for (int j = 0; j < n; ++j) p.real[j] = f[j];
  fftw_execute(p.fwd);
  const int nh = n / 2;
  for (int k = 0; k <= nh; ++k) {
    std::complex<double> ik(0.0, double(k));
    std::complex<double> mult = (order == 1) ? ik : ik * ik;
    p.spec[k] *= mult / double(n);
  }
  // Nyquist mode has no well-defined odd derivative; drop it.
  if (order % 2 == 1) p.spec[nh] = 0.0;
  fftw_execute(p.bwd);
  Eigen::ArrayXd out(n);
  for (int j = 0; j < n; ++j) out[j] = p.real[j];
  return out;
}

Eigen::ArrayXd fd4_derivative(const Eigen::ArrayXd& f, int order) {
  const int n = int(f.size());
  const double h = 2.0 * M_PI / n;
  Eigen::ArrayXd out(n);
  auto at = [&](int j) { return f[((j % n) + n) % n]; };
  if (order == 1) {
    for (int j = 0; j < n; ++j)
      out[j] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
  } else {
    for (int j = 0; j < n; ++j)
      out[j] = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2)) /
               (12.0 * h * h);
  }
  return out;
}

}  // namespace

Eigen::ArrayXd periodic_derivative(const Eigen::ArrayXd& f, int order, DerivScheme scheme) {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  if (f.size() < 5) throw std::invalid_argument("need at least 5 samples");
  if (scheme == DerivScheme::Spectral && f.size() % 2 == 0)
    return spectral_derivative(f, order);
  return fd4_derivative(f, order);
}

}  // namespace osmoflow
