#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "wavekit/numgrid.hpp"

namespace wavekit::linalg {

struct EigenPairs {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // unit Euclidean norm
};

// Eigenpairs with ascending indices first..last (inclusive, zero based).
EigenPairs eigenpairs_by_index(const SymmetricMatrix& a, std::size_t first, std::size_t last);

// All eigenvalues only (ascending).
std::vector<double> eigenvalues(const SymmetricMatrix& a);

// Solves a tridiagonal system; with cyclic = true the corner entries
// lower[0] (row 0, column n-1) and upper[n-1] (row n-1, column 0) are included.
std::vector<std::complex<double>> solve_tridiagonal(std::span<const std::complex<double>> lower,
                                                    std::span<const std::complex<double>> diag,
                                                    std::span<const std::complex<double>> upper,
                                                    std::span<const std::complex<double>> rhs,
                                                    bool cyclic);

}  // namespace wavekit::linalg
