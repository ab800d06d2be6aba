#include "wavekit/numgrid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "wavekit/errors.hpp"

namespace wavekit {

namespace {

struct Term {
  std::ptrdiff_t index;
  double factor;
};

// Expresses psi[j] (j possibly outside the grid) as a combination of node values.
struct Resolved {
  std::array<Term, 2> terms{};
  int count = 0;
};

Resolved resolve(const Grid& grid, std::ptrdiff_t j) {
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  Resolved r;
  if (j >= 0 && j < n) {
    r.terms[r.count++] = {j, 1.0};
    return r;
  }
  if (grid.boundary() == Boundary::periodic) {
    r.terms[r.count++] = {((j % n) + n) % n, 1.0};
    return r;
  }
  if (j < 0) {
    if (grid.kind() == GridKind::radial) {
      const std::ptrdiff_t mirror = -j - 2;
      if (mirror >= 0) r.terms[r.count++] = {mirror, -1.0};
      return r;
    }
    r.terms[r.count++] = {0, 2.0};
    r.terms[r.count++] = {-j, -1.0};
    return r;
  }
  r.terms[r.count++] = {n - 1, 2.0};
  r.terms[r.count++] = {2 * (n - 1) - j, -1.0};
  return r;
}

void check_points(std::size_t n) {
  if (n < Grid::kMinPoints) {
    throw ConfigError("grid needs at least " + std::to_string(Grid::kMinPoints) +
                      " points, got " + std::to_string(n));
  }
}

}  // namespace

Grid Grid::line(double x_min, double x_max, std::size_t n_points, Boundary boundary) {
  check_points(n_points);
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw ConfigError("grid requires finite x_min < x_max");
  }
  const double divisions =
      boundary == Boundary::periodic ? static_cast<double>(n_points) : static_cast<double>(n_points - 1);
  return Grid(GridKind::line, boundary, x_min, x_max, n_points, (x_max - x_min) / divisions);
}

Grid Grid::radial(double r_max, std::size_t n_points) {
  check_points(n_points);
  if (!std::isfinite(r_max) || !(r_max > 0.0)) {
    throw ConfigError("radial grid requires r_max > 0");
  }
  const double h = r_max / static_cast<double>(n_points);
  return Grid(GridKind::radial, Boundary::dirichlet, h, r_max, n_points, h);
}

std::vector<double> Grid::positions() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

std::size_t Grid::active_begin() const {
  if (boundary_ == Boundary::periodic || kind_ == GridKind::radial) return 0;
  return 1;
}

std::size_t Grid::active_end() const {
  if (boundary_ == Boundary::periodic) return n_;
  return n_ - 1;
}

double Grid::box_length() const {
  if (kind_ == GridKind::radial) return x_max_;
  return x_max_ - x_min_;
}

WaveField::WaveField(Grid g, std::vector<complex> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw UsageError("field has " + std::to_string(values.size()) + " samples but grid has " +
                     std::to_string(grid.size()));
  }
}

double integrate(const Grid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw UsageError("sample count does not match grid");
  const std::size_t n = f.size();
  double sum = 0.0;
  for (double v : f) sum += v;
  switch (grid.boundary()) {
    case Boundary::periodic:
      break;
    case Boundary::dirichlet:
      if (grid.kind() == GridKind::radial) {
        sum -= 0.5 * f[n - 1];
      } else {
        sum -= 0.5 * (f[0] + f[n - 1]);
      }
      break;
  }
  return sum * grid.spacing();
}

complex inner_product(const WaveField& a, const WaveField& b) {
  if (!(a.grid == b.grid)) throw UsageError("inner_product: fields live on different grids");
  const std::size_t n = a.size();
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    const complex p = std::conj(a[i]) * b[i];
    re[i] = p.real();
    im[i] = p.imag();
  }
  return {integrate(a.grid, re), integrate(a.grid, im)};
}

double norm(const WaveField& a) { return std::sqrt(std::max(0.0, inner_product(a, a).real())); }

WaveField normalized(WaveField a) {
  const double nrm = norm(a);
  if (nrm == 0.0) throw DomainError("cannot normalize a zero field");
  for (auto& v : a.values) v /= nrm;
  return a;
}

std::size_t count_nodes(std::span<const double> values, double relative_floor) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  const double floor = peak * relative_floor;
  std::size_t nodes = 0;
  int last_sign = 0;
  for (double v : values) {
    if (std::abs(v) <= floor) continue;
    const int s = v > 0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

std::size_t count_nodes(const WaveField& psi) {
  std::vector<double> re(psi.size()), im(psi.size());
  double nre = 0.0, nim = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
    nre += re[i] * re[i];
    nim += im[i] * im[i];
  }
  return count_nodes(nre >= nim ? re : im);
}

SymmetricMatrix::SymmetricMatrix(std::size_t n, std::size_t kd, bool banded)
    : n_(n), kd_(kd), banded_(banded), data_(banded ? (kd + 1) * n : n * n, 0.0) {}

SymmetricMatrix SymmetricMatrix::banded(std::size_t n, std::size_t kd) {
  return SymmetricMatrix(n, kd, true);
}

SymmetricMatrix SymmetricMatrix::dense(std::size_t n) { return SymmetricMatrix(n, n, false); }

void SymmetricMatrix::add(std::size_t i, std::size_t j, double v) {
  if (i > j) std::swap(i, j);
  if (banded_) {
    if (j - i > kd_) throw UsageError("entry outside matrix band");
    data_[j * (kd_ + 1) + (kd_ + i - j)] += v;
  } else {
    data_[j * n_ + i] += v;
    if (i != j) data_[i * n_ + j] += v;
  }
}

double SymmetricMatrix::at(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (banded_) {
    if (j - i > kd_) return 0.0;
    return data_[j * (kd_ + 1) + (kd_ + i - j)];
  }
  return data_[j * n_ + i];
}

BandedOperator::BandedOperator(Grid grid, std::size_t bandwidth,
                               std::vector<std::vector<double>> diagonals)
    : grid_(grid), bandwidth_(bandwidth), diagonals_(std::move(diagonals)) {
  if (diagonals_.size() != 2 * bandwidth_ + 1) throw UsageError("diagonal count does not match bandwidth");
  for (const auto& d : diagonals_) {
    if (d.size() != grid_.size()) throw UsageError("diagonal length does not match grid");
  }
}

const std::vector<double>& BandedOperator::diagonal(int offset) const {
  const auto b = static_cast<int>(bandwidth_);
  if (offset < -b || offset > b) throw UsageError("diagonal offset outside band");
  return diagonals_[static_cast<std::size_t>(offset + b)];
}

double BandedOperator::coefficient(std::size_t row, int offset) const { return diagonal(offset)[row]; }

template <typename T>
std::vector<T> BandedOperator::apply_impl(std::span<const T> psi) const {
  if (psi.size() != grid_.size()) throw UsageError("field length does not match operator grid");
  std::vector<T> out(psi.size(), T{});
  const auto b = static_cast<std::ptrdiff_t>(bandwidth_);
  for (std::size_t i = grid_.active_begin(); i < grid_.active_end(); ++i) {
    T acc{};
    for (std::ptrdiff_t k = -b; k <= b; ++k) {
      const double c = diagonals_[static_cast<std::size_t>(k + b)][i];
      if (c == 0.0) continue;
      const Resolved r = resolve(grid_, static_cast<std::ptrdiff_t>(i) + k);
      for (int t = 0; t < r.count; ++t) {
        acc += c * r.terms[t].factor * psi[static_cast<std::size_t>(r.terms[t].index)];
      }
    }
    out[i] = acc;
  }
  return out;
}

std::vector<complex> BandedOperator::apply(std::span<const complex> psi) const {
  return apply_impl<complex>(psi);
}

std::vector<double> BandedOperator::apply(std::span<const double> psi) const {
  return apply_impl<double>(psi);
}

WaveField BandedOperator::apply(const WaveField& psi) const {
  if (!(psi.grid == grid_)) throw UsageError("field grid does not match operator grid");
  return WaveField(grid_, apply(std::span<const complex>(psi.values)));
}

BandedOperator BandedOperator::scaled(double factor) const {
  auto d = diagonals_;
  for (auto& row : d) {
    for (auto& v : row) v *= factor;
  }
  return BandedOperator(grid_, bandwidth_, std::move(d));
}

BandedOperator BandedOperator::plus_diagonal(std::span<const double> values) const {
  if (values.size() != grid_.size()) throw UsageError("diagonal shift length does not match grid");
  auto d = diagonals_;
  auto& main = d[bandwidth_];
  for (std::size_t i = 0; i < main.size(); ++i) main[i] += values[i];
  return BandedOperator(grid_, bandwidth_, std::move(d));
}

SymmetricMatrix BandedOperator::active_matrix() const {
  const std::size_t first = grid_.active_begin();
  const std::size_t m = grid_.active_size();
  const bool wraps = grid_.boundary() == Boundary::periodic;
  SymmetricMatrix mat = wraps ? SymmetricMatrix::dense(m) : SymmetricMatrix::banded(m, bandwidth_);
  const auto b = static_cast<std::ptrdiff_t>(bandwidth_);
  for (std::size_t i = first; i < grid_.active_end(); ++i) {
    for (std::ptrdiff_t k = -b; k <= b; ++k) {
      const double c = diagonals_[static_cast<std::size_t>(k + b)][i];
      if (c == 0.0) continue;
      const Resolved r = resolve(grid_, static_cast<std::ptrdiff_t>(i) + k);
      for (int t = 0; t < r.count; ++t) {
        const auto j = static_cast<std::size_t>(r.terms[t].index);
        if (!grid_.is_active(j)) continue;
        // Upper triangle only; the stencil is symmetric.
        if (j >= i) mat.add(i - first, j - first, c * r.terms[t].factor);
      }
    }
  }
  return mat;
}

BandedOperator build_laplacian(const Grid& grid, int order) {
  const double h2 = grid.spacing() * grid.spacing();
  std::vector<double> stencil;
  switch (order) {
    case 2:
      stencil = {1.0, -2.0, 1.0};
      break;
    case 4:
      stencil = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
      break;
    default:
      throw ConfigError("laplacian order must be 2 or 4, got " + std::to_string(order));
  }
  const std::size_t b = stencil.size() / 2;
  std::vector<std::vector<double>> diagonals(stencil.size());
  for (std::size_t k = 0; k < stencil.size(); ++k) {
    diagonals[k].assign(grid.size(), stencil[k] / h2);
  }
  return BandedOperator(grid, b, std::move(diagonals));
}

BandedOperator build_radial_laplacian(const Grid& grid, int l) {
  if (grid.kind() != GridKind::radial) throw ConfigError("radial laplacian requires a radial grid");
  if (l < 0) throw ConfigError("angular momentum l must be >= 0, got " + std::to_string(l));
  const BandedOperator base = build_laplacian(grid, 2);
  if (l == 0) return base;
  std::vector<double> centrifugal(grid.size());
  const double ll = static_cast<double>(l) * static_cast<double>(l + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.x(i);
    centrifugal[i] = -ll / (r * r);
  }
  return base.plus_diagonal(centrifugal);
}

std::vector<complex> centered_derivative(const Grid& grid, std::span<const complex> psi) {
  if (psi.size() != grid.size()) throw UsageError("field length does not match grid");
  std::vector<complex> out(psi.size());
  const double inv = 0.5 / grid.spacing();
  auto value = [&](std::ptrdiff_t j) {
    const Resolved r = resolve(grid, j);
    complex v{};
    for (int t = 0; t < r.count; ++t) v += r.terms[t].factor * psi[static_cast<std::size_t>(r.terms[t].index)];
    return v;
  };
  for (std::size_t i = grid.active_begin(); i < grid.active_end(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    out[i] = (value(ii + 1) - value(ii - 1)) * inv;
  }
  return out;
}

}  // namespace wavekit
