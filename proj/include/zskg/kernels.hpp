#pragma once

// Dense f64 inner loops used by scoring and training.
//
// Every kernel has a portable scalar implementation and, on x86-64, an
// AVX2+FMA implementation. The active table is chosen once at startup from
// CPUID; set ZSKG_KERNELS=scalar to force the portable path. Results of the
// two paths agree to rounding (summation order differs), and a given table is
// deterministic run to run.

#include <cstddef>
#include <span>
#include <string_view>

#include "zskg/matrix.hpp"

namespace zskg::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[r] = dot(W[r, :], x) for a row-major rows x cols matrix
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// The table selected for this process.
const KernelTable& active();
// Test hook: override the active table. Not thread-safe with concurrent kernel calls.
void set_active(const KernelTable& table);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

// y = W x
inline void gemv(const Matrix& w, std::span<const double> x, std::span<double> y) {
  active().gemv(w.flat().data(), w.rows(), w.cols(), x.data(), y.data());
}

// y += W^T x
inline void gemv_transposed_acc(const Matrix& w, std::span<const double> x, std::span<double> y) {
  const auto& k = active();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (x[r] != 0.0) k.axpy(x[r], w.row(r).data(), y.data(), w.cols());
  }
}

// W += alpha * u v^T
inline void rank1_update(double alpha, std::span<const double> u, std::span<const double> v, Matrix& w) {
  const auto& k = active();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double a = alpha * u[r];
    if (a != 0.0) k.axpy(a, v.data(), w.row(r).data(), w.cols());
  }
}

}  // namespace zskg::kernels
