#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used across the pipeline. Every kernel has a
// scalar reference implementation (kernels::scalar) and an AVX2+FMA variant
// selected at runtime; the two are equivalence-tested against each other.
// set_force_scalar(true) pins the dispatcher to the reference path.

namespace pseudocal::kernels {

void set_force_scalar(bool v);
bool force_scalar();
bool avx2_available();
const char* active_backend();  // "avx2" or "scalar"

// Dense reductions.
double dot_f64(const double* a, const double* b, std::size_t n);
float dot_f32(const float* a, const float* b, std::size_t n);
float sumsq_f32(const float* a, std::size_t n);

// sum_i values[idx[i] + offset] * weights[i]; idx[i] + offset must be a
// valid index into values for every i.
float gather_dot_f32(const float* values, const std::int32_t* idx,
                     std::int32_t offset, const float* weights,
                     std::size_t n);

// y += alpha * x
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);

// Row-major 3x3 rotation + translation applied to a point array held as
// separate x/y/z columns. In-place allowed when out == in.
void transform_points_f64(const double r[9], const double t[3],
                          const double* x, const double* y, const double* z,
                          std::size_t n, double* ox, double* oy, double* oz);

namespace scalar {
double dot_f64(const double* a, const double* b, std::size_t n);
float dot_f32(const float* a, const float* b, std::size_t n);
float sumsq_f32(const float* a, std::size_t n);
float gather_dot_f32(const float* values, const std::int32_t* idx,
                     std::int32_t offset, const float* weights,
                     std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
void transform_points_f64(const double r[9], const double t[3],
                          const double* x, const double* y, const double* z,
                          std::size_t n, double* ox, double* oy, double* oz);
}  // namespace scalar

}  // namespace pseudocal::kernels
