#include <cstddef>

#include "slmf/kernel.hpp"

namespace slmf::kernel::detail {

namespace {

inline void normalize_pivot_row(Vector& prow, double& prhs, int q) {
  const double inv = 1.0 / prow[q];
  for (double& v : prow) v *= inv;
  prhs *= inv;
  prow[q] = 1.0;
}

inline void eliminate(Vector& row, double& rhs, const Vector& prow, double prhs, int q) {
  const double f = row[q];
  if (f == 0.0) return;
  const std::size_t n = row.size();
  for (std::size_t j = 0; j < n; ++j) row[j] -= f * prow[j];
  rhs -= f * prhs;
  row[q] = 0.0;
}

}  // namespace

void pivot_serial(std::span<Vector> rows, Vector& rhs, Vector& cost_row, int r, int q) {
  normalize_pivot_row(rows[r], rhs[r], q);
  const Vector& prow = rows[r];
  const double prhs = rhs[r];
  const int m = static_cast<int>(rows.size());
  for (int i = 0; i < m; ++i) {
    if (i != r) eliminate(rows[i], rhs[i], prow, prhs, q);
  }
  double unused = 0.0;
  eliminate(cost_row, unused, prow, prhs, q);
}

void pivot_parallel(std::span<Vector> rows, Vector& rhs, Vector& cost_row, int r, int q) {
  normalize_pivot_row(rows[r], rhs[r], q);
  const Vector& prow = rows[r];
  const double prhs = rhs[r];
  const int m = static_cast<int>(rows.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    if (i != r) eliminate(rows[i], rhs[i], prow, prhs, q);
  }
  double unused = 0.0;
  eliminate(cost_row, unused, prow, prhs, q);
}

}  // namespace slmf::kernel::detail
