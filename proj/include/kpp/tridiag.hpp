#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kpp {

// Periodic tridiagonal matrix: row j couples j-1, j, j+1 modulo N.
// lower[j] = A(j, j-1), diag[j] = A(j, j), upper[j] = A(j, j+1).
struct CyclicTridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  std::size_t size() const noexcept { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const;
  CyclicTridiagonal transposed() const;
  CyclicTridiagonal shifted(double sigma) const;  // A - sigma I

  // Row-major dense copy, N*N entries.
  std::vector<double> dense() const;

  // min_j (A_jj - sum_{k != j} |A_jk|)
  double gershgorin_lower_bound() const;
};

// Solves A x = b for a cyclic tridiagonal A (N >= 3) by the Thomas algorithm
// with a Sherman-Morrison correction for the corner entries. Intended for
// diagonally dominant systems; no pivoting.
std::vector<double> solve_cyclic(const CyclicTridiagonal& a, std::span<const double> b);

// Solves a non-periodic tridiagonal system; lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> b);

}  // namespace kpp
