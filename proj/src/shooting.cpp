#include "wavekit/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "wavekit/errors.hpp"

namespace wavekit::shooting {

namespace {

using Mat = std::array<double, 4>;  // row major 2x2
using Vec = std::array<double, 2>;

Vec mul(const Mat& m, const Vec& v) { return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]}; }

Vec rescaled(Vec v) {
  const double s = std::max(std::abs(v[0]), std::abs(v[1]));
  if (s > 0.0 && std::isfinite(s)) {
    v[0] /= s;
    v[1] /= s;
  }
  return v;
}

// Transfer (psi, psi') across length L of psi'' = -k2 psi, scaled by exp(-kappa L)
// in the exponential case.
Mat continuum_transfer(double k2, double length) {
  if (k2 > 0.0) {
    const double k = std::sqrt(k2);
    const double c = std::cos(k * length), s = std::sin(k * length);
    return {c, s / k, -k * s, c};
  }
  if (k2 < 0.0) {
    const double kappa = std::sqrt(-k2);
    const double e2 = std::exp(-2.0 * kappa * length);
    const double ch = 0.5 * (1.0 + e2);
    const double sh = -0.5 * std::expm1(-2.0 * kappa * length);
    return {ch, sh / kappa, kappa * sh, ch};
  }
  return {1.0, length, 0.0, 1.0};
}

// Chebyshev U_{r-1}(tau) and U_{r-2}(tau), both scaled by one positive factor.
std::pair<double, double> chebyshev_pair(double tau, std::size_t r) {
  const double n = static_cast<double>(r);
  if (r == 0) return {0.0, -1.0};
  if (std::abs(tau) < 1.0) {
    const double theta = std::acos(tau);
    const double s = std::sin(theta);
    if (s == 0.0) return {n, n - 1.0};
    return {std::sin(n * theta) / s, std::sin((n - 1.0) * theta) / s};
  }
  if (tau == 1.0) return {n, n - 1.0};
  if (tau == -1.0) {
    const double sgn = (r % 2 == 1) ? 1.0 : -1.0;  // (-1)^(r-1)
    return {sgn * n, -sgn * (n - 1.0)};
  }
  const double phi = std::acosh(std::abs(tau));
  const double sh = std::sinh(phi);
  // sinh(r phi) e^{-r phi} and sinh((r-1) phi) e^{-r phi}
  const double a = -0.5 * std::expm1(-2.0 * n * phi);
  const double b = 0.5 * (std::exp(-phi) - std::exp(-(2.0 * n - 1.0) * phi));
  if (tau > 1.0) return {a / sh, b / sh};
  const double sgn = (r % 2 == 1) ? 1.0 : -1.0;
  return {sgn * a / sh, -sgn * b / sh};
}

}  // namespace

MatchingFunction MatchingFunction::continuum(std::vector<Region> regions, LocalWavenumber k2) {
  if (regions.empty()) throw UsageError("shooting needs at least one region");
  MatchingFunction f;
  f.regions_ = std::move(regions);
  f.k2_ = std::move(k2);
  return f;
}

MatchingFunction MatchingFunction::lattice(const Grid& grid, std::vector<double> node_potential,
                                           LocalWavenumber k2) {
  if (grid.kind() != GridKind::line || grid.boundary() != Boundary::dirichlet) {
    throw ConfigError("lattice shooting requires a dirichlet line grid");
  }
  if (node_potential.size() != grid.size()) throw UsageError("node potential does not match grid");
  MatchingFunction f;
  f.lattice_ = true;
  f.k2_ = std::move(k2);
  f.node_potential_ = std::move(node_potential);
  f.h_ = grid.spacing();
  f.x0_ = grid.x_min();
  // Runs of equal node potential are the constant regions of the recurrence.
  const auto& v = f.node_potential_;
  std::size_t start = 1;
  for (std::size_t j = 2; j + 1 < v.size(); ++j) {
    if (v[j] != v[start]) {
      f.regions_.push_back({static_cast<double>(start), static_cast<double>(j), v[start]});
      start = j;
    }
  }
  f.regions_.push_back({static_cast<double>(start), static_cast<double>(v.size() - 1), v[start]});
  return f;
}

double MatchingFunction::x_left() const { return lattice_ ? x0_ : regions_.front().x_begin; }

double MatchingFunction::x_right() const {
  return lattice_ ? x0_ + h_ * static_cast<double>(node_potential_.size() - 1) : regions_.back().x_end;
}

std::optional<std::pair<double, double>> MatchingFunction::continuum_value(double energy, double x_stop) const {
  Vec state{0.0, 1.0};
  for (const Region& r : regions_) {
    if (r.x_begin >= x_stop) break;
    const double k2 = k2_(energy, r.value);
    if (!std::isfinite(k2)) return std::nullopt;
    const double end = std::min(r.x_end, x_stop);
    state = rescaled(mul(continuum_transfer(k2, end - r.x_begin), state));
  }
  return std::make_pair(state[0], state[1]);
}

std::optional<double> MatchingFunction::operator()(double energy) const {
  if (!lattice_) {
    const auto v = continuum_value(energy, regions_.back().x_end);
    if (!v) return std::nullopt;
    return v->first;
  }
  // (psi_j, psi_{j-1}) advanced through each run of nodes with T^r = U_{r-1} T - U_{r-2} I.
  const double h2 = h_ * h_;
  Vec state{1.0, 0.0};
  for (const Region& r : regions_) {
    const double k2 = k2_(energy, r.value);
    if (!std::isfinite(k2)) return std::nullopt;
    const double two_tau = 2.0 - h2 * k2;
    const auto run = static_cast<std::size_t>(r.x_end - r.x_begin);
    const auto [u1, u2] = chebyshev_pair(0.5 * two_tau, run);
    const Mat tr{u1 * two_tau - u2, -u1, u1, -u2};
    state = rescaled(mul(tr, state));
  }
  return state[0];
}

std::vector<double> MatchingFunction::lattice_values(double energy) const {
  const std::size_t n = node_potential_.size();
  std::vector<double> psi(n, 0.0);
  psi[1] = 1.0;
  const double h2 = h_ * h_;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    psi[j + 1] = (2.0 - h2 * k2_(energy, node_potential_[j])) * psi[j] - psi[j - 1];
    const double s = std::max(std::abs(psi[j + 1]), std::abs(psi[j]));
    if (s > 1e100) {
      for (std::size_t i = 0; i <= j + 1; ++i) psi[i] /= s;
    }
  }
  psi[n - 1] = 0.0;
  return psi;
}

std::size_t MatchingFunction::node_count(double energy) const {
  if (lattice_) {
    auto psi = lattice_values(energy);
    psi.pop_back();
    return count_nodes(psi, 0.0);
  }
  // Zeros per region from the closed form: a phase count where oscillatory, at most
  // one sign change otherwise. The wall values themselves are not nodes.
  std::size_t nodes = 0;
  Vec state{0.0, 1.0};
  for (const Region& r : regions_) {
    const double k2 = k2_(energy, r.value);
    if (!std::isfinite(k2)) throw DomainError("node_count evaluated at a singular energy");
    const double len = r.x_end - r.x_begin;
    const Vec next = mul(continuum_transfer(k2, len), state);
    const bool last = &r == &regions_.back();
    if (k2 > 0.0) {
      const double k = std::sqrt(k2);
      const double theta0 = std::atan2(state[0], state[1] / k);
      const double theta1 = theta0 + k * len;
      // integers m with theta0 < m pi < theta1
      const double lo = std::floor(theta0 / std::numbers::pi) + 1.0;
      double hi = std::ceil(theta1 / std::numbers::pi) - 1.0;
      if (!last && next[0] == 0.0) hi += 1.0;
      if (hi >= lo) nodes += static_cast<std::size_t>(hi - lo + 1.0);
    } else if (!last || next[0] != 0.0) {
      if ((state[0] > 0.0 && next[0] < 0.0) || (state[0] < 0.0 && next[0] > 0.0)) ++nodes;
    }
    state = rescaled(next);
  }
  return nodes;
}

WaveField MatchingFunction::state(double energy, const Grid& grid) const {
  WaveField psi(grid);
  if (lattice_) {
    if (grid.size() != node_potential_.size()) throw UsageError("state grid does not match lattice grid");
    // Recur inward from both walls and join at the last oscillatory node, so neither
    // side integrates into a decaying tail.
    const std::size_t n = node_potential_.size();
    const double h2 = h_ * h_;
    const auto left = lattice_values(energy);
    std::vector<double> right(n, 0.0);
    right[n - 2] = 1.0;
    for (std::size_t j = n - 2; j >= 2; --j) {
      right[j - 1] = (2.0 - h2 * k2_(energy, node_potential_[j])) * right[j] - right[j + 1];
      const double s = std::max(std::abs(right[j - 1]), std::abs(right[j]));
      if (s > 1e100) {
        for (std::size_t i = j - 1; i < n; ++i) right[i] /= s;
      }
    }
    std::size_t m = n / 2;
    for (std::size_t j = n - 2; j >= 1; --j) {
      if (k2_(energy, node_potential_[j]) > 0.0) {
        m = j;
        break;
      }
    }
    while (m > 1 && (right[m] == 0.0 || std::abs(right[m]) < 1e-8 * std::abs(right[m - 1]))) --m;
    const double scale = left[m] / right[m];
    for (std::size_t i = 0; i < n; ++i) psi[i] = i <= m ? left[i] : scale * right[i];
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
  } else {
    // Mantissa and log-magnitude per node, so growing exponentials cannot overflow.
    std::vector<double> mant(grid.size(), 0.0), logm(grid.size(), -std::numeric_limits<double>::infinity());
    Vec start{0.0, 1.0};
    double start_log = 0.0;
    std::size_t i = 0;
    while (i < grid.size() && grid.x(i) <= x_left()) ++i;
    for (const Region& r : regions_) {
      const double k2 = k2_(energy, r.value);
      if (!std::isfinite(k2)) throw DomainError("state evaluated at a singular energy");
      const double kappa = k2 < 0.0 ? std::sqrt(-k2) : 0.0;
      for (; i < grid.size() && grid.x(i) < r.x_end && grid.x(i) < x_right(); ++i) {
        const double d = grid.x(i) - r.x_begin;
        mant[i] = mul(continuum_transfer(k2, d), start)[0];
        logm[i] = start_log + kappa * d;
      }
      const double len = r.x_end - r.x_begin;
      const Vec next = mul(continuum_transfer(k2, len), start);
      const double s = std::max(std::abs(next[0]), std::abs(next[1]));
      start = {next[0] / s, next[1] / s};
      start_log += kappa * len + std::log(s);
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (mant[j] != 0.0) top = std::max(top, logm[j]);
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      psi[j] = mant[j] == 0.0 ? 0.0 : mant[j] * std::exp(logm[j] - top);
    }
  }
  double peak = 0.0;
  double first = 0.0;
  for (const auto& v : psi.values) {
    if (std::abs(v.real()) > peak) peak = std::abs(v.real());
  }
  for (const auto& v : psi.values) {
    if (std::abs(v.real()) > 1e-3 * peak) {
      first = v.real();
      break;
    }
  }
  if (first < 0.0) {
    for (auto& v : psi.values) v = -v;
  }
  return normalized(std::move(psi));
}

RootScan find_roots(const MatchingFunction& f, double lo, double hi, const ScanOptions& options) {
  if (!(hi > lo)) throw ConfigError("energy bracket must satisfy lo < hi");
  if (options.scan_points < 2) throw ConfigError("scan needs at least 2 points");
  RootScan out;

  // Split the bracket at excluded energies; each piece is scanned with open ends.
  std::vector<double> cuts{lo};
  for (double e : options.excluded) {
    if (e > lo && e < hi) cuts.push_back(e);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  const double span = hi - lo;

  auto eval = [&](double e) {
    ++out.evaluations;
    return f(e);
  };

  // Final bracket of the sign change, narrowed to machine precision.
  auto bisect = [&](double a, double fa, double b) {
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const auto fm = eval(m);
      if (!fm) break;
      if (*fm == 0.0) return std::make_pair(m, m);
      if ((*fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = *fm;
      } else {
        b = m;
      }
    }
    return std::make_pair(a, b);
  };

  struct Sample {
    double e;
    double value;
    std::size_t nodes;
  };

  // At a root the outermost node sits on the wall; it is interior on one side of the
  // root only, so the root state carries the smaller of the two counts.
  auto accept_root = [&](const Sample& a, const Sample& b) {
    const auto [lo_e, hi_e] = bisect(a.e, a.value, b.e);
    out.roots.push_back(0.5 * (lo_e + hi_e));
    out.node_counts.push_back(std::min(f.node_count(lo_e), f.node_count(hi_e)));
  };

  // Recursive cell processing with node-count consistency refinement.
  std::function<void(const Sample&, const Sample&, std::size_t)> cell = [&](const Sample& a, const Sample& b,
                                                                            std::size_t depth) {
    const bool flips = (a.value < 0.0) != (b.value < 0.0);
    const std::size_t dn = a.nodes > b.nodes ? a.nodes - b.nodes : b.nodes - a.nodes;
    const bool consistent = flips ? dn == 1 : dn == 0;
    if (options.node_refinement && !consistent && depth < options.max_refinement_depth) {
      const double m = 0.5 * (a.e + b.e);
      const auto fm = eval(m);
      if (fm && *fm != 0.0) {
        const Sample mid{m, *fm, f.node_count(m)};
        cell(a, mid, depth + 1);
        cell(mid, b, depth + 1);
        return;
      }
    }
    if (flips) accept_root(a, b);
  };

  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const auto points = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(static_cast<double>(options.scan_points) * (b - a) / span)));
    // Open ends at excluded energies, closed ends at the bracket.
    const double pad_a = c == 0 ? 0.0 : (b - a) * 1e-9;
    const double pad_b = c + 2 == cuts.size() ? 0.0 : (b - a) * 1e-9;
    std::optional<Sample> prev;
    for (std::size_t i = 0; i < points; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(points - 1);
      const double e = (a + pad_a) + t * ((b - pad_b) - (a + pad_a));
      const auto v = eval(e);
      if (!v) {
        out.skipped.push_back(e);
        prev.reset();
        continue;
      }
      if (*v == 0.0) {
        out.roots.push_back(e);
        out.node_counts.push_back(f.node_count(e));
        prev.reset();
        continue;
      }
      const Sample s{e, *v, options.node_refinement ? f.node_count(e) : 0};
      if (prev) cell(*prev, s, 0);
      prev = s;
    }
  }
  std::vector<std::size_t> order(out.roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return out.roots[x] < out.roots[y]; });
  RootScan sorted = out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.roots[i] = out.roots[order[i]];
    sorted.node_counts[i] = out.node_counts[order[i]];
  }
  return sorted;
}

std::size_t count_sign_changes(const MatchingFunction& f, double lo, double hi, std::size_t n,
                               const std::vector<double>& excluded) {
  std::size_t changes = 0;
  std::optional<double> prev;
  double prev_e = lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    bool crosses_excluded = false;
    for (double x : excluded) {
      if (x > prev_e && x <= e) crosses_excluded = true;
    }
    const auto v = f(e);
    if (!v || *v == 0.0 || crosses_excluded) {
      if (v && *v == 0.0) ++changes;
      prev = v && *v != 0.0 ? v : std::nullopt;
      prev_e = e;
      continue;
    }
    if (prev && ((*prev < 0.0) != (*v < 0.0))) ++changes;
    prev = v;
    prev_e = e;
  }
  return changes;
}

}  // namespace wavekit::shooting
