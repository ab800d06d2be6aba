#include "wavekit/linalg.hpp"

#include <lapacke.h>

#include <string>

#include "wavekit/errors.hpp"

namespace wavekit::linalg {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw NonConvergenceError(std::string(routine) + " failed with info = " + std::to_string(info), {});
  }
}

EigenPairs unpack(std::size_t n, lapack_int found, const std::vector<double>& w, const std::vector<double>& z) {
  EigenPairs out;
  out.values.assign(w.begin(), w.begin() + found);
  out.vectors.resize(static_cast<std::size_t>(found));
  for (lapack_int k = 0; k < found; ++k) {
    const auto col = static_cast<std::size_t>(k) * n;
    out.vectors[static_cast<std::size_t>(k)].assign(z.begin() + static_cast<std::ptrdiff_t>(col),
                                                    z.begin() + static_cast<std::ptrdiff_t>(col + n));
  }
  return out;
}

}  // namespace

EigenPairs eigenpairs_by_index(const SymmetricMatrix& a, std::size_t first, std::size_t last) {
  const std::size_t n = a.size();
  if (first > last || last >= n) {
    throw ConfigError("requested eigenpairs " + std::to_string(first) + ".." + std::to_string(last) +
                      " but the problem has only " + std::to_string(n) + " unknowns");
  }
  const auto nn = static_cast<lapack_int>(n);
  const auto il = static_cast<lapack_int>(first + 1);
  const auto iu = static_cast<lapack_int>(last + 1);
  const std::size_t count = last - first + 1;
  std::vector<double> w(n);
  std::vector<double> z(n * count);
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');

  if (a.is_banded() && a.bandwidth() == 1) {
    // Tridiagonal: dstevx needs no n x n workspace.
    const auto& ab = a.storage();
    std::vector<double> d(n), e(n > 1 ? n - 1 : 1);
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = ab[2 * j + 1];
      if (j > 0) e[j - 1] = ab[2 * j];
    }
    std::vector<lapack_int> ifail(n);
    const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', nn, d.data(), e.data(), 0.0, 0.0, il, iu,
                                           abstol, &found, w.data(), z.data(), nn, ifail.data());
    check_info(info, "dstevx");
  } else if (a.is_banded()) {
    auto ab = a.storage();
    const auto kd = static_cast<lapack_int>(a.bandwidth());
    std::vector<double> q(n * n);
    std::vector<lapack_int> ifail(n);
    const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', nn, kd, ab.data(), kd + 1, q.data(),
                                           nn, 0.0, 0.0, il, iu, abstol, &found, w.data(), z.data(), nn,
                                           ifail.data());
    check_info(info, "dsbevx");
  } else {
    auto mat = a.storage();
    std::vector<lapack_int> ifail(n);
    const lapack_int info = LAPACKE_dsyevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', nn, mat.data(), nn, 0.0, 0.0, il, iu,
                                           abstol, &found, w.data(), z.data(), nn, ifail.data());
    check_info(info, "dsyevx");
  }
  return unpack(n, found, w, z);
}

std::vector<double> eigenvalues(const SymmetricMatrix& a) {
  const std::size_t n = a.size();
  const auto nn = static_cast<lapack_int>(n);
  std::vector<double> w(n);
  if (a.is_banded()) {
    auto ab = a.storage();
    const auto kd = static_cast<lapack_int>(a.bandwidth());
    check_info(LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'U', nn, kd, ab.data(), kd + 1, w.data(), nullptr, nn),
               "dsbev");
  } else {
    auto mat = a.storage();
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', nn, mat.data(), nn, w.data()), "dsyevd");
  }
  return w;
}

std::vector<std::complex<double>> solve_tridiagonal(std::span<const std::complex<double>> lower,
                                                    std::span<const std::complex<double>> diag,
                                                    std::span<const std::complex<double>> upper,
                                                    std::span<const std::complex<double>> rhs, bool cyclic) {
  using cd = std::complex<double>;
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) throw UsageError("tridiagonal size mismatch");

  // Thomas algorithm on (a, b, c) with a[0] and c[n-1] ignored.
  auto thomas = [n](std::vector<cd> a, std::vector<cd> b, std::vector<cd> c, std::vector<cd> d) {
    for (std::size_t i = 1; i < n; ++i) {
      const cd w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    std::vector<cd> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
  };

  std::vector<cd> a(lower.begin(), lower.end());
  std::vector<cd> b(diag.begin(), diag.end());
  std::vector<cd> c(upper.begin(), upper.end());
  std::vector<cd> d(rhs.begin(), rhs.end());
  if (!cyclic) return thomas(a, b, c, d);

  // Sherman-Morrison: A = T + u v^T with u = (gamma, 0.., beta), v = (1, 0.., alpha/gamma).
  const cd alpha = lower[0];      // row 0, column n-1
  const cd beta = upper[n - 1];   // row n-1, column 0
  const cd gamma = -b[0];
  std::vector<cd> bb = b;
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;
  std::vector<cd> x = thomas(a, bb, c, d);
  std::vector<cd> u(n, cd{});
  u[0] = gamma;
  u[n - 1] = beta;
  std::vector<cd> z = thomas(a, bb, c, u);
  const cd fact = (x[0] + alpha * x[n - 1] / gamma) / (cd{1.0} + z[0] + alpha * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

}  // namespace wavekit::linalg
