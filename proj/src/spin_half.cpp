#include "wavekit/spin_half.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "wavekit/errors.hpp"
#include "wavekit/linalg.hpp"

namespace wavekit::spin_half {

namespace {

const complex I{0.0, 1.0};

std::optional<std::size_t> neighbour(const Grid& grid, std::size_t i, int dir) {
  const std::size_t n = grid.size();
  if (grid.boundary() == Boundary::periodic) return (i + n + static_cast<std::size_t>(dir + 1) - 1) % n;
  const std::size_t j = dir > 0 ? i + 1 : i - 1;
  if (i == 0 && dir < 0) return std::nullopt;
  if (!grid.is_active(j)) return std::nullopt;
  return j;
}

complex at(const std::vector<complex>& v, std::optional<std::size_t> j) { return j ? v[*j] : complex{}; }

// 1 + V/E0 per node; throws unless positive.
std::vector<double> weights(const Grid& grid, const PotentialSpec& potential, const UnitSystem& units) {
  check_covers(potential, grid);
  const double e0 = units.rest_energy();
  std::vector<double> b = sample(potential, grid);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = 1.0 + b[i] / e0;
    if (!(b[i] > 0.0)) {
      throw InvalidScenarioError("weight 1 + V/E0 is not positive at x = " + format_number(grid.x(i)) +
                                 " (V <= -E0)");
    }
  }
  return b;
}

SpinorSpectrum generalized_solve(const Grid& grid, const std::vector<double>& b, const UnitSystem& units,
                                 double mass, double wilson_r, bool massless, std::size_t n_states) {
  const std::size_t first = grid.active_begin();
  const std::size_t m = grid.active_size();
  const std::size_t total = 2 * m;
  if (n_states == 0 || n_states > total) {
    throw ConfigError("n_states must lie in [1, " + std::to_string(total) + "]");
  }
  const bool periodic = grid.boundary() == Boundary::periodic;
  const double h = grid.spacing();
  const double hc = units.hbar * units.c;

  // Real symmetric form of H_D after psi_lower -> i psi_lower, scaled to
  // B^{-1/2} H B^{-1/2}. Unknowns are interleaved (u_r, l_r); a periodic ring is laid
  // out zig-zag (0, m-1, 1, m-2, ...) so the wrap-around coupling stays inside a band.
  auto slot = [&](std::size_t r) {
    if (!periodic) return r;
    return 2 * r < m ? 2 * r : 2 * (m - 1 - r) + 1;
  };
  SymmetricMatrix mat = SymmetricMatrix::banded(total, periodic ? 5 : 3);
  auto put = [&](std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    const double bi = b[first + i / 2], bj = b[first + j / 2];
    mat.add(2 * slot(i / 2) + i % 2, 2 * slot(j / 2) + j % 2, v / std::sqrt(bi * bj));
  };
  const double diag = massless ? 0.0 : mass + wilson_r * hc / h;
  const double hop = massless ? 0.0 : -wilson_r * hc / (2.0 * h);
  const double kin = hc / (2.0 * h);
  for (std::size_t r = 0; r < m; ++r) {
    put(2 * r, 2 * r, diag);
    put(2 * r + 1, 2 * r + 1, -diag);
    if (r + 1 < m || periodic) {
      const std::size_t s = (r + 1) % m;
      put(2 * r, 2 * s, hop);
      put(2 * r + 1, 2 * s + 1, -hop);
      put(2 * r, 2 * s + 1, kin);
      put(2 * s, 2 * r + 1, -kin);
    }
  }

  // The spectrum is symmetric about zero, so the smallest |E| sit around index m.
  const std::size_t lo = m > n_states ? m - n_states : 0;
  const std::size_t hi = std::min(total - 1, m + n_states - 1);
  const linalg::EigenPairs pairs = linalg::eigenpairs_by_index(mat, lo, hi);

  std::vector<std::size_t> order(pairs.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double ax = std::abs(pairs.values[x]), ay = std::abs(pairs.values[y]);
    if (std::abs(ax - ay) > 1e-12 * std::max(ax, ay)) return ax < ay;
    return pairs.values[x] < pairs.values[y];
  });

  SpinorSpectrum out;
  double worst = 0.0;
  for (std::size_t k = 0; k < n_states && k < order.size(); ++k) {
    const std::size_t idx = order[k];
    const double e = pairs.values[idx];
    const auto& y = pairs.vectors[idx];
    SpinorField psi(grid);
    for (std::size_t r = 0; r < m; ++r) {
      const double s = 1.0 / std::sqrt(b[first + r]);
      psi.upper[first + r] = s * y[2 * slot(r)];
      psi.lower[first + r] = I * (s * y[2 * slot(r) + 1]);
    }
    const double nrm = norm(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi.upper[i] /= nrm;
      psi.lower[i] /= nrm;
    }
    // ||H_D psi - E B psi|| on the untransformed complex operator.
    const SpinorField hpsi = apply_dirac_operator(psi, units, wilson_r, massless);
    SpinorField res(grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      res.upper[i] = hpsi.upper[i] - e * b[i] * psi.upper[i];
      res.lower[i] = hpsi.lower[i] - e * b[i] * psi.lower[i];
    }
    worst = std::max(worst, norm(res));
    out.energies.push_back(e);
    out.states.push_back(std::move(psi));
  }
  out.diagnostics["max_generalized_residual"] = worst;
  out.diagnostics["unknowns"] = static_cast<double>(total);
  return out;
}

}  // namespace

double norm(const SpinorField& psi) { return std::sqrt(inner_product(psi, psi).real()); }

complex inner_product(const SpinorField& a, const SpinorField& b) {
  if (!(a.grid == b.grid)) throw UsageError("spinor fields live on different grids");
  std::vector<double> re(a.size()), im(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const complex v = std::conj(a.upper[i]) * b.upper[i] + std::conj(a.lower[i]) * b.lower[i];
    re[i] = v.real();
    im[i] = v.imag();
  }
  return {integrate(a.grid, re), integrate(a.grid, im)};
}

CMatrix CMatrix::zero(std::size_t n) { return {n, std::vector<complex>(n * n)}; }

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m = zero(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix operator*(const CMatrix& x, const CMatrix& y) {
  if (x.n != y.n) throw UsageError("matrix size mismatch");
  CMatrix out = CMatrix::zero(x.n);
  for (std::size_t i = 0; i < x.n; ++i) {
    for (std::size_t k = 0; k < x.n; ++k) {
      for (std::size_t j = 0; j < x.n; ++j) out(i, j) += x(i, k) * y(k, j);
    }
  }
  return out;
}

CMatrix operator+(const CMatrix& x, const CMatrix& y) {
  if (x.n != y.n) throw UsageError("matrix size mismatch");
  CMatrix out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
  return out;
}

std::array<CMatrix, 3> pauli_matrices() {
  CMatrix sx = CMatrix::zero(2), sy = CMatrix::zero(2), sz = CMatrix::zero(2);
  sx(0, 1) = 1.0;
  sx(1, 0) = 1.0;
  sy(0, 1) = -I;
  sy(1, 0) = I;
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  return {sx, sy, sz};
}

CliffordSet CliffordSet::dirac() {
  CliffordSet set;
  set.dimension = Dimension::four;
  set.pauli = pauli_matrices();
  for (const CMatrix& s : set.pauli) {
    CMatrix a = CMatrix::zero(4);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        a(i, j + 2) = s(i, j);
        a(i + 2, j) = s(i, j);
      }
    }
    set.alpha.push_back(a);
  }
  set.beta = CMatrix::identity(4);
  set.beta(2, 2) = -1.0;
  set.beta(3, 3) = -1.0;
  return set;
}

CliffordSet CliffordSet::reduced() {
  CliffordSet set;
  set.dimension = Dimension::two;
  set.pauli = pauli_matrices();
  set.alpha = {set.pauli[0]};
  set.beta = set.pauli[2];
  return set;
}

CliffordReport clifford_check(const CliffordSet& set) {
  CliffordReport rep;
  auto worst = [](const CMatrix& m, const CMatrix& target) {
    double w = 0.0;
    for (std::size_t i = 0; i < m.a.size(); ++i) w = std::max(w, std::abs(m.a[i] - target.a[i]));
    return w;
  };
  auto record = [&](const std::string& name, double v) {
    rep.identities[name] = v;
    rep.max_violation = std::max(rep.max_violation, v);
  };
  const std::size_t n = set.beta.n;
  const CMatrix id = CMatrix::identity(n);
  const CMatrix zero = CMatrix::zero(n);
  const CMatrix two_id = id + id;
  const char* axes = "xyz";
  for (std::size_t i = 0; i < set.alpha.size(); ++i) {
    for (std::size_t k = i; k < set.alpha.size(); ++k) {
      const CMatrix anti = set.alpha[i] * set.alpha[k] + set.alpha[k] * set.alpha[i];
      record(std::string("alpha_") + axes[i] + " alpha_" + axes[k] + " + alpha_" + axes[k] + " alpha_" + axes[i],
             worst(anti, i == k ? two_id : zero));
    }
    record(std::string("alpha_") + axes[i] + " beta + beta alpha_" + axes[i],
           worst(set.alpha[i] * set.beta + set.beta * set.alpha[i], zero));
  }
  record("beta^2", worst(set.beta * set.beta, id));
  const CMatrix id2 = CMatrix::identity(2);
  for (std::size_t i = 0; i < 3; ++i) {
    record(std::string("sigma_") + axes[i] + "^2", worst(set.pauli[i] * set.pauli[i], id2));
  }
  record("sigma_x sigma_y + sigma_y sigma_x",
         worst(set.pauli[0] * set.pauli[1] + set.pauli[1] * set.pauli[0], CMatrix::zero(2)));
  return rep;
}

SpinorField apply_dirac_operator(const SpinorField& psi, const UnitSystem& units, double wilson_r,
                                 bool massless) {
  const Grid& grid = psi.grid;
  const double h = grid.spacing();
  const double hc = units.hbar * units.c;
  const double e0 = massless ? 0.0 : units.rest_energy();
  const double w = massless ? 0.0 : wilson_r * hc * h / 2.0;
  SpinorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_active(i)) continue;
    const auto l = neighbour(grid, i, -1), r = neighbour(grid, i, +1);
    const complex du = (at(psi.upper, r) - at(psi.upper, l)) / (2.0 * h);
    const complex dl = (at(psi.lower, r) - at(psi.lower, l)) / (2.0 * h);
    const complex lap_u = (at(psi.upper, r) - 2.0 * psi.upper[i] + at(psi.upper, l)) / (h * h);
    const complex lap_l = (at(psi.lower, r) - 2.0 * psi.lower[i] + at(psi.lower, l)) / (h * h);
    out.upper[i] = -I * hc * dl + (e0 * psi.upper[i] - w * lap_u);
    out.lower[i] = -I * hc * du - (e0 * psi.lower[i] - w * lap_l);
  }
  return out;
}

SpinorField apply_modified_hamiltonian(const SpinorField& psi, const PotentialSpec& potential,
                                       const UnitSystem& units) {
  units.validate();
  const std::vector<double> b = weights(psi.grid, potential, units);
  SpinorField out = apply_dirac_operator(psi, units);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double f = 1.0 / b[i];
    out.upper[i] *= f;
    out.lower[i] *= f;
  }
  return out;
}

SpinorSpectrum solve_spin_half_stationary(const Grid& grid, const PotentialSpec& potential,
                                          const UnitSystem& units, double wilson_r, std::size_t n_states) {
  units.validate();
  if (grid.kind() != GridKind::line) throw ConfigError("spin-1/2 solver needs a line grid");
  if (!(wilson_r >= 0.0)) throw ConfigError("wilson_r must be >= 0");
  return generalized_solve(grid, weights(grid, potential, units), units, units.rest_energy(), wilson_r, false,
                           n_states);
}

SpinorSpectrum solve_massless(const Grid& grid, const PotentialSpec& potential, const UnitSystem& units,
                              std::size_t n_states) {
  units.validate();
  if (grid.kind() != GridKind::line) throw ConfigError("massless solver needs a line grid");
  return generalized_solve(grid, weights(grid, potential, units), units, 0.0, 0.0, true, n_states);
}

SpinorTrajectory propagate_massless(const SpinorField& phi0, const PotentialSpec& potential, double dt,
                                    std::size_t steps, const UnitSystem& units, std::size_t frame_stride) {
  units.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (frame_stride == 0) throw ConfigError("frame stride must be >= 1");
  const Grid& grid = phi0.grid;
  const std::vector<double> b = weights(grid, potential, units);
  const double h = grid.spacing();
  const double c = units.c;

  auto rhs = [&](const SpinorField& f) {
    SpinorField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.is_active(i)) continue;
      const auto l = neighbour(grid, i, -1), r = neighbour(grid, i, +1);
      const double s = -c / (2.0 * h * b[i]);
      out.upper[i] = s * (at(f.lower, r) - at(f.lower, l));
      out.lower[i] = s * (at(f.upper, r) - at(f.upper, l));
    }
    return out;
  };
  auto axpy = [&](const SpinorField& x, double a, const SpinorField& y) {
    SpinorField out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.upper[i] += a * y.upper[i];
      out.lower[i] += a * y.lower[i];
    }
    return out;
  };

  SpinorField phi = phi0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_active(i)) phi.upper[i] = phi.lower[i] = 0.0;
  }
  SpinorTrajectory traj;
  traj.times.push_back(0.0);
  traj.frames.push_back(phi);
  traj.norms.push_back(norm(phi));
  const double n0 = traj.norms.front();
  double worst_step = 0.0;
  for (std::size_t step = 1; step <= steps; ++step) {
    const SpinorField k1 = rhs(phi);
    const SpinorField k2 = rhs(axpy(phi, 0.5 * dt, k1));
    const SpinorField k3 = rhs(axpy(phi, 0.5 * dt, k2));
    const SpinorField k4 = rhs(axpy(phi, dt, k3));
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi.upper[i] += dt / 6.0 * (k1.upper[i] + 2.0 * k2.upper[i] + 2.0 * k3.upper[i] + k4.upper[i]);
      phi.lower[i] += dt / 6.0 * (k1.lower[i] + 2.0 * k2.lower[i] + 2.0 * k3.lower[i] + k4.lower[i]);
    }
    const double nv = norm(phi);
    worst_step = std::max(worst_step, std::abs(nv - traj.norms.back()));
    traj.norms.push_back(nv);
    if (n0 > 0.0 && (!std::isfinite(nv) || nv > 10.0 * n0)) {
      throw StabilityError("spinor norm grew beyond 10x its initial value at step " + std::to_string(step) +
                           "; reduce dt");
    }
    if (step % frame_stride == 0 || step == steps) {
      traj.times.push_back(static_cast<double>(step) * dt);
      traj.frames.push_back(phi);
    }
  }
  double drift = 0.0;
  for (double v : traj.norms) drift = std::max(drift, std::abs(v - n0));
  traj.diagnostics["norm_drift"] = n0 > 0.0 ? drift / n0 : drift;
  traj.diagnostics["max_step_norm_change"] = n0 > 0.0 ? worst_step / n0 : worst_step;
  return traj;
}

}  // namespace wavekit::spin_half
