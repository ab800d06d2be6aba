#include "wavekit/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavekit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kBisectionTolerance = 1e-12;
constexpr int kScanRefinement = 8;

// Breakpoints (absolute positions) and values for piecewise-constant variants.
struct Pieces {
  std::vector<double> breaks;
  std::vector<double> values;  // breaks.size() + 1 entries
};

Pieces pieces_of(const PotentialSpec& spec) {
  const double c = spec.center;
  return std::visit(
      overloaded{
          [](const potential::Free&) { return Pieces{{}, {0.0}}; },
          [c](const potential::SquareWell& w) {
            return Pieces{{c - w.half_width, c + w.half_width}, {0.0, -w.depth, 0.0}};
          },
          [c](const potential::Step& s) { return Pieces{{c + s.edge}, {0.0, s.height}}; },
          [c](const potential::Barrier& b) { return Pieces{{c + b.left, c + b.right}, {0.0, b.height, 0.0}}; },
          [c](const potential::PiecewiseConstant& p) {
            Pieces out{p.breakpoints, p.values};
            for (auto& b : out.breaks) b += c;
            return out;
          },
          [](const auto&) -> Pieces { throw UsageError("potential is not piecewise constant"); },
      },
      spec.variant);
}

}  // namespace

const char* to_string(SingularKind kind) {
  switch (kind) {
    case SingularKind::E_equals_V:
      return "E_equals_V";
    case SingularKind::E_equals_2V:
      return "E_equals_2V";
    case SingularKind::V_equals_minus_E0:
      return "V_equals_minus_E0";
  }
  return "unknown";
}

PotentialSpec PotentialSpec::square_well(double depth, double half_width, double center) {
  if (!(depth > 0.0)) throw ConfigError("square_well depth must be > 0");
  if (!(half_width > 0.0)) throw ConfigError("square_well half_width must be > 0");
  return {potential::SquareWell{depth, half_width}, center};
}

PotentialSpec PotentialSpec::step(double height, double edge, double center) {
  return {potential::Step{height, edge}, center};
}

PotentialSpec PotentialSpec::barrier(double height, double left, double right, double center) {
  if (!(right > left)) throw ConfigError("barrier requires left < right");
  return {potential::Barrier{height, left, right}, center};
}

PotentialSpec PotentialSpec::harmonic(double omega, double mass, double center) {
  if (!(omega > 0.0) || !(mass > 0.0)) throw ConfigError("harmonic requires omega > 0 and mass > 0");
  return {potential::Harmonic{omega, mass}, center};
}

PotentialSpec PotentialSpec::coulomb(double strength) { return {potential::Coulomb{strength}, 0.0}; }

PotentialSpec PotentialSpec::piecewise_constant(std::vector<double> breakpoints, std::vector<double> values,
                                                double center) {
  if (values.size() != breakpoints.size() + 1) {
    throw ConfigError("piecewise_constant needs exactly one more value than breakpoints");
  }
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end()) {
    throw ConfigError("piecewise_constant breakpoints must be strictly increasing");
  }
  return {potential::PiecewiseConstant{std::move(breakpoints), std::move(values)}, center};
}

PotentialSpec PotentialSpec::constant(double value) { return piecewise_constant({}, {value}); }

PotentialSpec PotentialSpec::tabulated(std::vector<double> positions, std::vector<double> values) {
  if (positions.size() < 2 || positions.size() != values.size()) {
    throw ConfigError("tabulated potential needs >= 2 samples with matching positions");
  }
  if (std::adjacent_find(positions.begin(), positions.end(), std::greater_equal<>()) != positions.end()) {
    throw ConfigError("tabulated positions must be strictly increasing");
  }
  return {potential::Tabulated{std::move(positions), std::move(values)}, 0.0};
}

std::string PotentialSpec::type_name() const {
  return std::visit(overloaded{
                        [](const potential::Free&) { return "free"; },
                        [](const potential::SquareWell&) { return "square_well"; },
                        [](const potential::Step&) { return "step"; },
                        [](const potential::Barrier&) { return "barrier"; },
                        [](const potential::Harmonic&) { return "harmonic"; },
                        [](const potential::Coulomb&) { return "coulomb"; },
                        [](const potential::PiecewiseConstant&) { return "piecewise_constant"; },
                        [](const potential::Tabulated&) { return "tabulated"; },
                    },
                    variant);
}

bool PotentialSpec::is_piecewise_constant() const {
  return !std::holds_alternative<potential::Harmonic>(variant) &&
         !std::holds_alternative<potential::Coulomb>(variant) &&
         !std::holds_alternative<potential::Tabulated>(variant);
}

double evaluate(const PotentialSpec& spec, double x) {
  const double s = x - spec.center;
  return std::visit(
      overloaded{
          [](const potential::Free&) { return 0.0; },
          [s](const potential::SquareWell& w) { return std::abs(s) <= w.half_width ? -w.depth : 0.0; },
          [s](const potential::Step& st) { return s >= st.edge ? st.height : 0.0; },
          [s](const potential::Barrier& b) { return (s >= b.left && s <= b.right) ? b.height : 0.0; },
          [s](const potential::Harmonic& h) { return 0.5 * h.mass * h.omega * h.omega * s * s; },
          [x](const potential::Coulomb& c) {
            if (!(x > 0.0)) throw DomainError("coulomb potential evaluated at r <= 0");
            return -c.strength / x;
          },
          [s](const potential::PiecewiseConstant& p) {
            const auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), s);
            return p.values[static_cast<std::size_t>(it - p.breakpoints.begin())];
          },
          [x](const potential::Tabulated& t) {
            const auto& xs = t.positions;
            if (x < xs.front() || x > xs.back()) {
              throw DomainError("tabulated potential evaluated outside its samples");
            }
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            if (it == xs.end()) return t.values.back();
            const auto i = static_cast<std::size_t>(it - xs.begin());
            const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return (1.0 - w) * t.values[i - 1] + w * t.values[i];
          },
      },
      spec.variant);
}

std::vector<double> sample(const PotentialSpec& spec, const Grid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = evaluate(spec, grid.x(i));
  return v;
}

void check_covers(const PotentialSpec& spec, const Grid& grid) {
  if (std::holds_alternative<potential::Coulomb>(spec.variant) && grid.kind() != GridKind::radial) {
    throw ConfigError("coulomb potential requires a radial grid");
  }
  if (const auto* t = std::get_if<potential::Tabulated>(&spec.variant)) {
    const double last = grid.boundary() == Boundary::periodic ? grid.x(grid.size() - 1) : grid.x_max();
    if (t->positions.front() > grid.x_min() || t->positions.back() < last) {
      throw ConfigError("tabulated samples do not cover the grid domain");
    }
  }
}

std::vector<Region> regions(const PotentialSpec& spec, double x_lo, double x_hi) {
  const Pieces p = pieces_of(spec);
  std::vector<Region> out;
  double start = x_lo;
  for (std::size_t i = 0; i <= p.breaks.size(); ++i) {
    const double end = i < p.breaks.size() ? std::min(p.breaks[i], x_hi) : x_hi;
    if (end > start) {
      if (!out.empty() && out.back().value == p.values[i]) {
        out.back().x_end = end;
      } else {
        out.push_back({start, end, p.values[i]});
      }
      start = end;
    }
    if (start >= x_hi) break;
  }
  return out;
}

SingularSet find_singular_set(const PotentialSpec& spec, double energy, SingularKind kind, const Grid& grid) {
  if (!std::isfinite(energy)) throw DomainError("find_singular_set requires a finite energy");
  auto f = [&](double x) {
    const double v = evaluate(spec, x);
    switch (kind) {
      case SingularKind::E_equals_V:
        return energy - v;
      case SingularKind::E_equals_2V:
        return energy - 2.0 * v;
      case SingularKind::V_equals_minus_E0:
        return v + energy;
    }
    return 0.0;
  };
  const double lo = grid.x_min();
  const double hi = grid.boundary() == Boundary::periodic ? grid.x(grid.size() - 1) : grid.x_max();
  const std::size_t steps = kScanRefinement * (grid.size() - 1);
  const double dx = (hi - lo) / static_cast<double>(steps);
  const double accept = 1e-9 * std::max(1.0, std::abs(energy));

  SingularSet set;
  set.kind = kind;
  set.energy = energy;
  auto record = [&](double x) {
    if (set.locations.empty() || std::abs(set.locations.back() - x) > kBisectionTolerance * 10) {
      set.locations.push_back(x);
    }
  };

  double x_prev = lo;
  double f_prev = f(lo);
  bool in_zero_run = false;
  if (f_prev == 0.0) {
    record(lo);
    in_zero_run = true;
  }
  for (std::size_t k = 1; k <= steps; ++k) {
    const double x = k == steps ? hi : lo + static_cast<double>(k) * dx;
    const double fx = f(x);
    if (fx == 0.0) {
      if (!in_zero_run) record(x);
      in_zero_run = true;
    } else {
      if (in_zero_run && f_prev == 0.0 && x_prev != set.locations.back()) record(x_prev);
      in_zero_run = false;
      if (f_prev != 0.0 && (f_prev < 0.0) != (fx < 0.0)) {
        double a = x_prev, b = x, fa = f_prev;
        while (b - a > kBisectionTolerance) {
          const double m = 0.5 * (a + b);
          const double fm = f(m);
          if (fm == 0.0) {
            a = b = m;
            break;
          }
          if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        const double root = 0.5 * (a + b);
        if (std::abs(f(root)) <= accept) record(root);
      }
    }
    x_prev = x;
    f_prev = fx;
  }

  set.proximity = std::numeric_limits<double>::infinity();
  for (double x : set.locations) {
    const double t = (x - grid.x_min()) / grid.spacing();
    const double nearest = std::clamp(std::round(t), 0.0, static_cast<double>(grid.size() - 1));
    set.proximity = std::min(set.proximity, std::abs(x - grid.x(static_cast<std::size_t>(nearest))));
  }
  return set;
}

}  // namespace wavekit
