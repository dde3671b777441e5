#include "pseudocal/kernels.hpp"

#include <atomic>

#if defined(__GNUC__) || defined(__clang__)
#include <immintrin.h>
#define PSEUDOCAL_HAVE_X86_TARGETS 1
#endif

namespace pseudocal::kernels {

namespace {
std::atomic<bool> g_force_scalar{false};

bool cpu_has_avx2() {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
}  // namespace

void set_force_scalar(bool v) {
  g_force_scalar.store(v, std::memory_order_relaxed);
}

bool force_scalar() { return g_force_scalar.load(std::memory_order_relaxed); }

bool avx2_available() {
  static const bool avail = cpu_has_avx2();
  return avail;
}

const char* active_backend() {
  return (!force_scalar() && avx2_available()) ? "avx2" : "scalar";
}

namespace scalar {

double dot_f64(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

float sumsq_f32(const float* a, std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

float gather_dot_f32(const float* values, const std::int32_t* idx,
                     std::int32_t offset, const float* weights,
                     std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += values[idx[i] + offset] * weights[i];
  return s;
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void transform_points_f64(const double r[9], const double t[3],
                          const double* x, const double* y, const double* z,
                          std::size_t n, double* ox, double* oy, double* oz) {
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x[i], py = y[i], pz = z[i];
    ox[i] = r[0] * px + r[1] * py + r[2] * pz + t[0];
    oy[i] = r[3] * px + r[4] * py + r[5] * pz + t[1];
    oz[i] = r[6] * px + r[7] * py + r[8] * pz + t[2];
  }
}

}  // namespace scalar

#if defined(PSEUDOCAL_HAVE_X86_TARGETS)

namespace avx2 {

__attribute__((target("avx2,fma"))) static double hsum_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

__attribute__((target("avx2,fma"))) static float hsum_ps(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 sum = _mm_add_ps(lo, hi);
  sum = _mm_hadd_ps(sum, sum);
  sum = _mm_hadd_ps(sum, sum);
  return _mm_cvtss_f32(sum);
}

__attribute__((target("avx2,fma"))) double dot_f64(const double* a,
                                                   const double* b,
                                                   std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum_pd(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) float dot_f32(const float* a,
                                                  const float* b,
                                                  std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  }
  float s = hsum_ps(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) float sumsq_f32(const float* a,
                                                    std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(a + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float s = hsum_ps(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

__attribute__((target("avx2,fma"))) float gather_dot_f32(
    const float* values, const std::int32_t* idx, std::int32_t offset,
    const float* weights, std::size_t n) {
  const __m256i off = _mm256_set1_epi32(offset);
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i ix = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx + i));
    ix = _mm256_add_epi32(ix, off);
    __m256 v = _mm256_i32gather_ps(values, ix, 4);
    acc = _mm256_fmadd_ps(v, _mm256_loadu_ps(weights + i), acc);
  }
  float s = hsum_ps(acc);
  for (; i < n; ++i) s += values[idx[i] + offset] * weights[i];
  return s;
}

__attribute__((target("avx2,fma"))) void axpy_f64(double alpha,
                                                  const double* x, double* y,
                                                  std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) void transform_points_f64(
    const double r[9], const double t[3], const double* x, const double* y,
    const double* z, std::size_t n, double* ox, double* oy, double* oz) {
  const __m256d r00 = _mm256_set1_pd(r[0]), r01 = _mm256_set1_pd(r[1]),
                r02 = _mm256_set1_pd(r[2]), r10 = _mm256_set1_pd(r[3]),
                r11 = _mm256_set1_pd(r[4]), r12 = _mm256_set1_pd(r[5]),
                r20 = _mm256_set1_pd(r[6]), r21 = _mm256_set1_pd(r[7]),
                r22 = _mm256_set1_pd(r[8]);
  const __m256d t0 = _mm256_set1_pd(t[0]), t1 = _mm256_set1_pd(t[1]),
                t2 = _mm256_set1_pd(t[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d px = _mm256_loadu_pd(x + i);
    const __m256d py = _mm256_loadu_pd(y + i);
    const __m256d pz = _mm256_loadu_pd(z + i);
    __m256d vx = _mm256_fmadd_pd(r00, px, t0);
    vx = _mm256_fmadd_pd(r01, py, vx);
    vx = _mm256_fmadd_pd(r02, pz, vx);
    __m256d vy = _mm256_fmadd_pd(r10, px, t1);
    vy = _mm256_fmadd_pd(r11, py, vy);
    vy = _mm256_fmadd_pd(r12, pz, vy);
    __m256d vz = _mm256_fmadd_pd(r20, px, t2);
    vz = _mm256_fmadd_pd(r21, py, vz);
    vz = _mm256_fmadd_pd(r22, pz, vz);
    _mm256_storeu_pd(ox + i, vx);
    _mm256_storeu_pd(oy + i, vy);
    _mm256_storeu_pd(oz + i, vz);
  }
  if (i < n) scalar::transform_points_f64(r, t, x + i, y + i, z + i, n - i,
                                          ox + i, oy + i, oz + i);
}

}  // namespace avx2

#endif  // PSEUDOCAL_HAVE_X86_TARGETS

namespace {
inline bool use_avx2() { return !force_scalar() && avx2_available(); }
}  // namespace

double dot_f64(const double* a, const double* b, std::size_t n) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2()) return avx2::dot_f64(a, b, n);
#endif
  return scalar::dot_f64(a, b, n);
}

float dot_f32(const float* a, const float* b, std::size_t n) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2()) return avx2::dot_f32(a, b, n);
#endif
  return scalar::dot_f32(a, b, n);
}

float sumsq_f32(const float* a, std::size_t n) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2()) return avx2::sumsq_f32(a, n);
#endif
  return scalar::sumsq_f32(a, n);
}

float gather_dot_f32(const float* values, const std::int32_t* idx,
                     std::int32_t offset, const float* weights,
                     std::size_t n) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2()) return avx2::gather_dot_f32(values, idx, offset, weights, n);
#endif
  return scalar::gather_dot_f32(values, idx, offset, weights, n);
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2()) return avx2::axpy_f64(alpha, x, y, n);
#endif
  return scalar::axpy_f64(alpha, x, y, n);
}

void transform_points_f64(const double r[9], const double t[3],
                          const double* x, const double* y, const double* z,
                          std::size_t n, double* ox, double* oy, double* oz) {
#if defined(PSEUDOCAL_HAVE_X86_TARGETS)
  if (use_avx2())
    return avx2::transform_points_f64(r, t, x, y, z, n, ox, oy, oz);
#endif
  return scalar::transform_points_f64(r, t, x, y, z, n, ox, oy, oz);
}

}  // namespace pseudocal::kernels
