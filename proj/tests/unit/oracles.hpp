// Test-only reference computations. They share no code path with the
// library: plain dense linear algebra on small chains.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bdwalk::testing {

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    }
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    if (A[col][col] == 0) throw std::runtime_error("singular system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
    x[i] = s / A[i][i];
  }
  return x;
}

/// P(hit upper before lower) for every start in [lower, upper], from the
/// first-step equations h_k = p_k h_{k+1} + q_k h_{k-1}.
inline std::vector<double> hitting_by_linear_system(const std::function<double(std::int64_t)>& birth,
                                                    const std::function<double(std::int64_t)>& death,
                                                    std::int64_t lower, std::int64_t upper) {
  const auto m = static_cast<std::size_t>(upper - lower - 1);  // interior unknowns
  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::int64_t k = lower + 1 + static_cast<std::int64_t>(i);
    const double p = birth(k) / (birth(k) + death(k));
    const double q = 1.0 - p;
    A[i][i] = 1.0;
    if (i + 1 < m) A[i][i + 1] = -p; else rhs[i] += p;  // neighbour is upper: h = 1
    if (i > 0) A[i][i - 1] = -q;                         // lower neighbour: h = 0
  }
  auto interior = solve_dense(A, rhs);
  std::vector<double> h{0.0};
  h.insert(h.end(), interior.begin(), interior.end());
  h.push_back(1.0);
  return h;
}

/// Stationary distribution of the chain truncated to {0..N} (reflecting at N)
/// by solving the global balance equations with one replaced by sum(P) = 1.
inline std::vector<double> stationary_by_linear_system(const std::function<double(std::int64_t)>& birth,
                                                       const std::function<double(std::int64_t)>& death,
                                                       std::int64_t N) {
  const auto m = static_cast<std::size_t>(N + 1);
  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> rhs(m, 0.0);
  // rows: outflow = inflow for states 0..N-1, last row normalization
  for (std::size_t n = 0; n + 1 < m; ++n) {
    const auto k = static_cast<std::int64_t>(n);
    const double out = birth(k) + (k > 0 ? death(k) : 0.0);
    A[n][n] = -out;
    A[n][n + 1] += death(k + 1);
    if (n > 0) A[n][n - 1] += birth(k - 1);
  }
  for (std::size_t c = 0; c < m; ++c) A[m - 1][c] = 1.0;
  rhs[m - 1] = 1.0;
  return solve_dense(A, rhs);
}

}  // namespace bdwalk::testing
