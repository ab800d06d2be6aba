#include "wavekit/reference.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>

#include "wavekit/linalg.hpp"

namespace wavekit::reference {

BandedOperator schrodinger_operator(const Grid& grid, const PotentialSpec& potential, const UnitSystem& units,
                                    const SchrodingerOptions& options) {
  check_covers(potential, grid);
  const double kinetic = -units.hbar * units.hbar / (2.0 * units.m);
  const BandedOperator lap = grid.kind() == GridKind::radial ? build_radial_laplacian(grid, options.l)
                                                               : build_laplacian(grid, options.order);
  return lap.scaled(kinetic).plus_diagonal(sample(potential, grid));
}

SpectrumResult lowest_states(const BandedOperator& op, std::size_t n_states) {
  const Grid& grid = op.grid();
  if (n_states == 0) throw ConfigError("n_states must be >= 1");
  if (n_states > grid.active_size()) {
    throw ConfigError("n_states = " + std::to_string(n_states) + " exceeds the " +
                      std::to_string(grid.active_size()) + " grid unknowns");
  }
  const linalg::EigenPairs pairs = linalg::eigenpairs_by_index(op.active_matrix(), 0, n_states - 1);

  SpectrumResult out;
  double max_residual = 0.0;
  for (std::size_t k = 0; k < pairs.values.size(); ++k) {
    WaveField psi(grid);
    const auto& v = pairs.vectors[k];
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    double sign = 0.0;
    for (double x : v) {
      if (std::abs(x) > 1e-3 * peak) {
        sign = x > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < v.size(); ++i) psi[grid.active_begin() + i] = sign * v[i];
    psi = normalized(std::move(psi));

    const WaveField hpsi = op.apply(psi);
    WaveField r(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) r[i] = hpsi[i] - pairs.values[k] * psi[i];
    max_residual = std::max(max_residual, norm(r));

    out.energies.push_back(pairs.values[k]);
    out.node_counts.push_back(count_nodes(psi));
    out.states.push_back(std::move(psi));
  }
  out.diagnostics["max_residual"] = max_residual;
  out.diagnostics["unknowns"] = static_cast<double>(grid.active_size());
  return out;
}

SpectrumResult solve_schrodinger_stationary(const Grid& grid, const PotentialSpec& potential,
                                            std::size_t n_states, const UnitSystem& units,
                                            const SchrodingerOptions& options) {
  units.validate();
  return lowest_states(schrodinger_operator(grid, potential, units, options), n_states);
}

Trajectory propagate_schrodinger(const WaveField& psi0, const PotentialSpec& potential, double dt,
                                 std::size_t steps, const UnitSystem& units, std::size_t frame_stride) {
  units.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (frame_stride == 0) throw ConfigError("frame stride must be >= 1");
  const Grid& grid = psi0.grid;
  const BandedOperator h = schrodinger_operator(grid, potential, units);
  const std::size_t first = grid.active_begin();
  const std::size_t m = grid.active_size();
  const bool cyclic = grid.boundary() == Boundary::periodic;

  // (1 + i dt H / 2 hbar) psi_next = (1 - i dt H / 2 hbar) psi
  const complex a(0.0, 0.5 * dt / units.hbar);
  std::vector<complex> lower(m), diag(m), upper(m);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = first + r;
    diag[r] = 1.0 + a * h.coefficient(i, 0);
    lower[r] = a * h.coefficient(i, -1);
    upper[r] = a * h.coefficient(i, 1);
  }
  if (!cyclic) {
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
  }

  Trajectory traj;
  WaveField psi = psi0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_active(i)) psi[i] = 0.0;
  }
  traj.times.push_back(0.0);
  traj.frames.push_back(psi);
  traj.norms.push_back(norm(psi));

  std::vector<complex> rhs(m);
  for (std::size_t step = 1; step <= steps; ++step) {
    const std::vector<complex> hpsi = h.apply(std::span<const complex>(psi.values));
    for (std::size_t r = 0; r < m; ++r) rhs[r] = psi[first + r] - a * hpsi[first + r];
    const std::vector<complex> next = linalg::solve_tridiagonal(lower, diag, upper, rhs, cyclic);
    for (std::size_t r = 0; r < m; ++r) psi[first + r] = next[r];
    traj.norms.push_back(norm(psi));
    if (step % frame_stride == 0 || step == steps) {
      traj.times.push_back(static_cast<double>(step) * dt);
      traj.frames.push_back(psi);
    }
  }
  const double n0 = traj.norms.front();
  double drift = 0.0;
  for (double nv : traj.norms) drift = std::max(drift, std::abs(nv - n0));
  traj.diagnostics["norm_drift"] = n0 > 0 ? drift / n0 : drift;
  return traj;
}

double klein_gordon_energy(double p, double rest_energy, double c) { return std::hypot(c * p, rest_energy); }

std::pair<double, double> dirac_free_energies(double p, double rest_energy, double c) {
  const double e = klein_gordon_energy(p, rest_energy, c);
  return {e, -e};
}

double infinite_well_energy(int n, double width, const UnitSystem& units) {
  const double k = n * std::numbers::pi / width;
  return units.hbar * units.hbar * k * k / (2.0 * units.m);
}

double harmonic_energy(int n, double omega, const UnitSystem& units) { return units.hbar * omega * (n + 0.5); }

double hydrogenic_energy(int n, double strength, const UnitSystem& units) {
  return -strength * strength * units.m / (2.0 * units.hbar * units.hbar * n * n);
}

std::vector<double> finite_well_energies(double depth, double half_width, const UnitSystem& units) {
  auto k_of = [&](double e) { return std::sqrt(2.0 * units.m * (e + depth)) / units.hbar; };
  auto kappa_of = [&](double e) { return std::sqrt(-2.0 * units.m * e) / units.hbar; };
  // Pole-free forms of k tan(ka) = kappa and -k cot(ka) = kappa.
  auto even = [&](double e) {
    const double k = k_of(e);
    return k * std::sin(k * half_width) - kappa_of(e) * std::cos(k * half_width);
  };
  auto odd = [&](double e) {
    const double k = k_of(e);
    return k * std::cos(k * half_width) + kappa_of(e) * std::sin(k * half_width);
  };
  std::vector<double> roots;
  const int scan = 20000;
  for (auto f : {std::function<double(double)>(even), std::function<double(double)>(odd)}) {
    double e_prev = -depth;
    double f_prev = f(e_prev);
    for (int i = 1; i < scan; ++i) {
      const double e = -depth + depth * i / scan;
      const double fe = f(e);
      if ((fe < 0.0) != (f_prev < 0.0) && f_prev != 0.0) {
        double a = e_prev, b = e, fa = f_prev;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, depth); ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = f(mid);
          if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        roots.push_back(0.5 * (a + b));
      }
      e_prev = e;
      f_prev = fe;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace wavekit::reference
