#include "qsm/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "qsm/error.hpp"

namespace qsm {

namespace {

// The FFTW planner is not re-entrant; executing a finished plan on new
// arrays (fftw_execute_dft) is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int threads_from_env() {
  const char* env = std::getenv("QSM_NUM_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const GridSpec& grid, int sign) {
    std::lock_guard lock(planner_mutex());
    if (!threads_ready_) {
      fftw_init_threads();
      fftw_plan_with_nthreads(threads_from_env());
      threads_ready_ = true;
    }
    const auto key = std::make_tuple(grid.n(0), grid.n(1), grid.n(2), sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t n = grid.size();
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    // FFTW is row-major with the last index fastest, so axis order is reversed.
    fftw_plan plan = fftw_plan_dft_3d(grid.n(2), grid.n(1), grid.n(0), in, out,
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw NumericError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
  bool threads_ready_ = false;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(const GridSpec& grid, int sign, std::vector<Complex>& in,
             std::vector<Complex>& out) {
  fftw_plan plan = plan_cache().get(grid, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

int fft_thread_count() { return threads_from_env(); }

SpectralVolume forward_fft(const RealVolume& v) {
  std::vector<Complex> in(v.values().begin(), v.values().end());
  std::vector<Complex> out(in.size());
  execute(v.grid(), FFTW_FORWARD, in, out);
  return SpectralVolume(v.grid(), std::move(out));
}

InverseTransform inverse_fft_measured(const SpectralVolume& s,
                                      double tolerance) {
  std::vector<Complex> in(s.values());
  std::vector<Complex> out(in.size());
  execute(s.grid(), FFTW_BACKWARD, in, out);

  const double scale = 1.0 / static_cast<double>(out.size());
  std::vector<double> re(out.size());
  double re2 = 0.0;
  double im2 = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    re[i] = out[i].real() * scale;
    const double im = out[i].imag() * scale;
    re2 += re[i] * re[i];
    im2 += im * im;
  }
  const double total = std::sqrt(re2 + im2);
  const double residue = total > 0.0 ? std::sqrt(im2) / total : 0.0;
  if (residue > tolerance) {
    std::ostringstream os;
    os << "inverse FFT is not real: imaginary residue " << residue
       << " exceeds " << tolerance;
    throw SymmetryError(os.str(), residue);
  }
  return {RealVolume(s.grid(), std::move(re)), residue};
}

std::vector<double> sample_symbol(const GridSpec& grid, const Symbol& m) {
  const FrequencyGrid freq(grid);
  std::vector<double> values(grid.size());
  std::size_t idx = 0;
  for (int k = 0; k < grid.n(2); ++k) {
    for (int j = 0; j < grid.n(1); ++j) {
      for (int i = 0; i < grid.n(0); ++i, ++idx) {
        const double v = m(freq.at({i, j, k}));
        if (!std::isfinite(v)) {
          throw SymbolDomainError("symbol is not finite at frequency index (" +
                                      std::to_string(i) + ", " +
                                      std::to_string(j) + ", " +
                                      std::to_string(k) + ")",
                                  idx);
        }
        values[idx] = v;
      }
    }
  }
  return values;
}

SpectralVolume apply_multiplier(const SpectralVolume& s,
                                std::span<const double> multiplier) {
  if (multiplier.size() != s.size()) {
    throw ArgumentError("multiplier length does not match spectrum");
  }
  std::vector<Complex> out(s.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= multiplier[i];
  return SpectralVolume(s.grid(), std::move(out));
}

SpectralVolume apply_multiplier(const SpectralVolume& s, const Symbol& m) {
  const auto values = sample_symbol(s.grid(), m);
  return apply_multiplier(s, values);
}

}  // namespace qsm
