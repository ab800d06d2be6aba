#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wavekit {

using complex = std::complex<double>;

enum class GridKind { line, radial };
enum class Boundary { dirichlet, periodic };

// Uniform 1D grid.
//
// Node placement depends on the kind and boundary:
//   line/dirichlet  x_i = x_min + i h, i = 0..n-1, h = (x_max - x_min)/(n - 1);
//                   the two end nodes are walls held at zero by every operator.
//   line/periodic   x_i = x_min + i h, i = 0..n-1, h = (x_max - x_min)/n;
//                   x_max is identified with x_min and is not a node.
//   radial          r_i = (i + 1) h, i = 0..n-1, h = r_max/n, so x_min = h and
//                   (x_max - x_min)/(n - 1) = h still holds. The reduced function
//                   u(r) = r R(r) vanishes at the excluded origin and at r_max.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  static Grid line(double x_min, double x_max, std::size_t n_points,
                   Boundary boundary = Boundary::dirichlet);
  static Grid radial(double r_max, std::size_t n_points);

  GridKind kind() const { return kind_; }
  Boundary boundary() const { return boundary_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * h_; }
  std::vector<double> positions() const;

  // Nodes that carry unknowns; walls (dirichlet ends, radial outer end) are excluded.
  std::size_t active_begin() const;
  std::size_t active_end() const;
  std::size_t active_size() const { return active_end() - active_begin(); }
  bool is_active(std::size_t i) const { return i >= active_begin() && i < active_end(); }

  // Length over which wave modes are quantized (wall to wall, or one period).
  double box_length() const;

  bool operator==(const Grid&) const = default;

 private:
  Grid(GridKind kind, Boundary boundary, double x_min, double x_max, std::size_t n, double h)
      : kind_(kind), boundary_(boundary), x_min_(x_min), x_max_(x_max), n_(n), h_(h) {}

  GridKind kind_;
  Boundary boundary_;
  double x_min_;
  double x_max_;
  std::size_t n_;
  double h_;
};

struct WaveField {
  Grid grid;
  std::vector<complex> values;

  explicit WaveField(Grid g) : grid(g), values(g.size()) {}
  WaveField(Grid g, std::vector<complex> v);

  std::size_t size() const { return values.size(); }
  complex& operator[](std::size_t i) { return values[i]; }
  const complex& operator[](std::size_t i) const { return values[i]; }
};

// Trapezoidal quadrature of real samples over the grid. Radial grids integrate
// from the origin, where the reduced function vanishes.
double integrate(const Grid& grid, std::span<const double> samples);

// Trapezoidal quadrature of conj(a)*b.
complex inner_product(const WaveField& a, const WaveField& b);
double norm(const WaveField& a);
WaveField normalized(WaveField a);

// Interior sign changes of the real part (or of the dominant part for complex fields).
std::size_t count_nodes(const WaveField& psi);
std::size_t count_nodes(std::span<const double> values, double relative_floor = 1e-8);

// Symmetric matrix over the active nodes of a grid, either LAPACK upper band
// storage (column-major, ldab = kd + 1) or full column-major storage.
class SymmetricMatrix {
 public:
  static SymmetricMatrix banded(std::size_t n, std::size_t kd);
  static SymmetricMatrix dense(std::size_t n);

  std::size_t size() const { return n_; }
  bool is_banded() const { return banded_; }
  std::size_t bandwidth() const { return kd_; }
  void add(std::size_t i, std::size_t j, double v);
  double at(std::size_t i, std::size_t j) const;
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

 private:
  SymmetricMatrix(std::size_t n, std::size_t kd, bool banded);

  std::size_t n_;
  std::size_t kd_;
  bool banded_;
  std::vector<double> data_;
};

// Centered-difference operator stored as stencil diagonals on every grid node.
// diagonal(k)[i] multiplies psi[i + k]. Boundary handling lives in the grid:
// references past a dirichlet wall use the odd reflection psi[-j] = 2 psi[0] - psi[j],
// the radial origin uses u(-r) = -u(r), periodic grids wrap.
class BandedOperator {
 public:
  BandedOperator(Grid grid, std::size_t bandwidth, std::vector<std::vector<double>> diagonals);

  const Grid& grid() const { return grid_; }
  std::size_t bandwidth() const { return bandwidth_; }
  const std::vector<double>& diagonal(int offset) const;
  double coefficient(std::size_t row, int offset) const;

  // Applies the stencil using the field's actual wall values; wall nodes map to zero.
  WaveField apply(const WaveField& psi) const;
  std::vector<complex> apply(std::span<const complex> psi) const;
  std::vector<double> apply(std::span<const double> psi) const;

  BandedOperator scaled(double factor) const;
  BandedOperator plus_diagonal(std::span<const double> values) const;

  // Matrix over active nodes with homogeneous wall values.
  SymmetricMatrix active_matrix() const;

 private:
  template <typename T>
  std::vector<T> apply_impl(std::span<const T> psi) const;

  Grid grid_;
  std::size_t bandwidth_;
  std::vector<std::vector<double>> diagonals_;
};

BandedOperator build_laplacian(const Grid& grid, int order);
BandedOperator build_radial_laplacian(const Grid& grid, int l);

// The discrete first derivative (centered, order 2) as an antisymmetric stencil.
std::vector<complex> centered_derivative(const Grid& grid, std::span<const complex> psi);

}  // namespace wavekit
