#include "ste/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ste {

namespace {

constexpr double kPi = 3.14159265358979323846;

double xi_for(AtomBasisLabel initial, double gamma, int n) {
  const double occ = initial == AtomBasisLabel::EE ? n + 1.0 : double(n);
  return std::sqrt(2.0 * ((gamma * gamma + 1.0) * occ + gamma * gamma));
}

// Concurrence at one time from the requested engine.
double concurrence_at(Engine engine, const CouplingParams& params,
                      AtomBasisLabel initial, int n, double t, int cutoff) {
  if (engine == Engine::ClosedForm) {
    if (initial == AtomBasisLabel::EE) return concurrence_x(reduced_xstate_ee(params, n, t));
    if (initial == AtomBasisLabel::EG) return concurrence_x(reduced_xstate_eg(params, n, t));
    throw std::invalid_argument("closed-form engine supports ee and eg only");
  }
  return concurrence_general(reduced_state(engine, params, initial, n, t, cutoff));
}

// Max concurrence over [0, span], sampled at `points` and refined around the
// best sample by golden-section search.
double max_concurrence(Engine engine, const CouplingParams& params,
                       AtomBasisLabel initial, int n, double span, int points) {
  const int cutoff = n + kDefaultCutoffMargin;
  // one eigendecomposition for the whole scan when the oracle drives it
  std::optional<OracleEvolver> oracle;
  if (engine == Engine::Oracle) oracle.emplace(params, cutoff);
  auto eval = [&](double t) {
    if (oracle) return concurrence_general(oracle->reduced_at(initial, n, t));
    return concurrence_at(engine, params, initial, n, t, cutoff);
  };

  double best = 0.0, best_t = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double t = span * i / points;
    const double c = eval(t);
    if (c > best) { best = c; best_t = t; }
  }
  // golden-section refinement inside the bracketing samples
  const double step = span / points;
  double a = std::max(0.0, best_t - step), b = best_t + step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = eval(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = eval(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::ClosedForm: return "closed-form";
    case Engine::Block: return "block";
    case Engine::Oracle: return "oracle";
  }
  throw std::logic_error("engine_name: bad engine");
}

std::optional<Engine> engine_from_name(const std::string& name) {
  if (name == "closed-form") return Engine::ClosedForm;
  if (name == "block") return Engine::Block;
  if (name == "oracle") return Engine::Oracle;
  return std::nullopt;
}

DensityMatrix4 reduced_state(Engine engine, const CouplingParams& params,
                             AtomBasisLabel initial, int n, double t, int cutoff) {
  switch (engine) {
    case Engine::ClosedForm:
      if (initial == AtomBasisLabel::EE)
        return DensityMatrix4{to_matrix(reduced_xstate_ee(params, n, t))};
      if (initial == AtomBasisLabel::EG)
        return DensityMatrix4{to_matrix(reduced_xstate_eg(params, n, t))};
      throw std::invalid_argument("closed-form engine supports ee and eg only");
    case Engine::Block:
      return reduced_general(params, initial, n, t);
    case Engine::Oracle:
      return evolve_oracle(params, initial, n, t, cutoff);
  }
  throw std::logic_error("reduced_state: bad engine");
}

CriticalPoint critical_point(AtomBasisLabel initial, int n) {
  if (n < 0) throw std::invalid_argument("critical_point: n must be >= 0");
  CriticalPoint cp{initial, n, 0.0, 0.0};
  if (initial == AtomBasisLabel::EE) {
    cp.gamma_crit = std::sqrt((n + 1.0) / (n + 2.0));
    cp.g_stm_crit = std::pow(std::sqrt(n + 2.0) - std::sqrt(n + 1.0), 2);
  } else if (initial == AtomBasisLabel::EG) {
    cp.gamma_crit = std::sqrt(n / (n + 1.0));
    cp.g_stm_crit = std::pow(std::sqrt(n + 1.0) - std::sqrt(double(n)), 2);
  } else {
    throw std::invalid_argument("critical_point: initial state must be ee or eg");
  }
  return cp;
}

bool verify_critical(AtomBasisLabel initial, int n, Engine engine) {
  const CriticalPoint cp = critical_point(initial, n);
  constexpr double delta = 0.02;
  auto max_conc = [&](double gamma) {
    const CouplingParams params = CouplingParams::from_gamma(1.0, gamma);
    const double xi = xi_for(initial, gamma, n);
    if (xi == 0.0) return 0.0;  // frozen dynamics
    const double span = 2.0 * kPi / (params.g() * xi);
    return max_concurrence(engine, params, initial, n, span, 2000);
  };

  if (initial == AtomBasisLabel::EE) {
    if (max_conc(cp.gamma_crit - delta) <= kEntangledThreshold) return false;
    if (max_conc(cp.gamma_crit) >= kZeroThreshold) return false;
    if (cp.gamma_crit + delta <= 1.0 && max_conc(cp.gamma_crit + delta) >= kZeroThreshold)
      return false;
    return true;
  }
  // EG: both sides of gamma_0 entangle, exactly gamma_0 gives zero
  if (max_conc(cp.gamma_crit) >= kZeroThreshold) return false;
  if (cp.gamma_crit - delta >= 0.0 && max_conc(cp.gamma_crit - delta) <= kEntangledThreshold)
    return false;
  if (cp.gamma_crit + delta <= 1.0 && max_conc(cp.gamma_crit + delta) <= kEntangledThreshold)
    return false;
  return true;
}

namespace {

// Times at which f crosses `level` upward, refined by bisection between the
// bracketing samples.
std::vector<double> up_crossings(const std::function<double(double)>& f,
                                 const std::vector<double>& samples, double span,
                                 double level) {
  std::vector<double> out;
  const int points = static_cast<int>(samples.size()) - 1;
  for (int i = 1; i <= points; ++i) {
    if (samples[i - 1] <= level && samples[i] > level) {
      double a = span * (i - 1) / points, b = span * i / points;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (a + b);
        (f(mid) <= level ? a : b) = mid;
      }
      out.push_back(0.5 * (a + b));
    }
  }
  return out;
}

// Smallest m for which the crossing sequence is m-periodic; the period is the
// mean of x[k+m] - x[k].
std::optional<double> period_from_crossings(const std::vector<double>& x) {
  for (std::size_t m = 1; m <= 3; ++m) {
    if (x.size() < m + 2) break;
    double sum = 0.0;
    double lo = 1e300, hi = -1e300;
    std::size_t count = 0;
    for (std::size_t k = 0; k + m < x.size(); ++k) {
      const double d = x[k + m] - x[k];
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      ++count;
    }
    const double mean = sum / count;
    if (hi - lo < 1e-7 * mean) return mean;
  }
  return std::nullopt;
}

}  // namespace

std::optional<PeriodEstimate> period(AtomBasisLabel initial, const CouplingParams& params,
                                     int n, PeriodMethod method,
                                     std::string* no_period_reason) {
  if (initial != AtomBasisLabel::EE && initial != AtomBasisLabel::EG)
    throw std::invalid_argument("period: initial state must be ee or eg");
  auto fail = [&](const char* why) -> std::optional<PeriodEstimate> {
    if (no_period_reason) *no_period_reason = why;
    return std::nullopt;
  };

  const double gamma = params.gamma();
  const double xi = xi_for(initial, gamma, n);
  if (xi == 0.0) return fail("frozen dynamics");
  const double base = kPi / (params.g() * xi);

  // probe one full candidate period for any entanglement at all
  const double probe_span = 2.0 * base;
  const double peak = max_concurrence(Engine::ClosedForm, params, initial, n, probe_span, 2000);
  if (peak <= kZeroThreshold) return fail("no entanglement");

  PeriodEstimate est{initial, n, gamma, 0.0, method};
  if (method == PeriodMethod::AnalyticXi) {
    if (initial == AtomBasisLabel::EE) {
      // at gamma = 0 the corner population vanishes and the signal is an
      // exact sine square, halving the generic 2 pi/(g xi)
      est.period = gamma == 0.0 ? base : 2.0 * base;
    } else {
      est.period = base;
    }
    return est;
  }

  // zero-crossing on the oracle's concurrence
  OracleEvolver oracle(params, n + kDefaultCutoffMargin);
  auto conc = [&](double t) { return concurrence_general(oracle.reduced_at(initial, n, t)); };
  const double span = 6.5 * base;  // at least three repeats of the lobe pattern
  const int points = 8000;
  std::vector<double> samples(points + 1);
  double sampled_peak = 0.0;
  for (int i = 0; i <= points; ++i) {
    samples[i] = conc(span * i / points);
    sampled_peak = std::max(sampled_peak, samples[i]);
  }
  if (sampled_peak <= kZeroThreshold) return fail("no entanglement");
  // crossing level relative to the peak: the signal dips through tangential
  // zeros over a window ~1e-2/omega wide at this level, several samples deep
  const auto crossings = up_crossings(conc, samples, span, sampled_peak * 1e-4);
  const auto p = period_from_crossings(crossings);
  if (!p) return fail("no entanglement");
  est.period = *p;
  return est;
}

std::vector<double> GridSpec::t_grid() const {
  std::vector<double> t(t_points);
  for (int i = 0; i < t_points; ++i)
    t[i] = t_min + (t_max - t_min) * i / (t_points - 1);
  return t;
}

LumbarRegion lumbar_region(int n, const std::vector<double>& gamma_grid,
                           const std::vector<double>& t_grid, double g_drv) {
  if (n < 0) throw std::invalid_argument("lumbar_region: n must be >= 0");
  SweepSpec spec;
  spec.initial = AtomBasisLabel::GG;
  spec.n = n;
  spec.g_drv = g_drv;
  spec.gamma_grid = gamma_grid;
  spec.t_grid = t_grid;
  spec.engine = Engine::Block;
  const SweepResult grid = sweep(spec);

  // no-STE baseline at gamma = 1 on the same time grid
  const CouplingParams baseline_params = CouplingParams::from_gamma(g_drv, 1.0);
  std::vector<double> baseline(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    baseline[j] =
        concurrence_general(reduced_general(baseline_params, AtomBasisLabel::GG, n, t_grid[j]));

  LumbarRegion region;
  region.degenerate_block = n < 2;
  for (std::size_t i = 0; i < gamma_grid.size(); ++i)
    for (std::size_t j = 0; j < t_grid.size(); ++j)
      if (grid.conc(i, j) > kEntangledThreshold && baseline[j] < kZeroThreshold)
        region.cells.push_back(
            {i, j, gamma_grid[i], t_grid[j], grid.conc(i, j), baseline[j]});
  return region;
}

namespace detail {

ValidationReport validate_with(const XStateFn& ee_form, const XStateFn& eg_form,
                               const GridSpec& grid, double tolerance) {
  ValidationReport report;
  report.grid = grid;
  report.tolerance = tolerance;
  const auto times = grid.t_grid();
  static const char* kElementNames[5] = {"A", "B", "C", "D", "E"};

  for (int n : grid.ns) {
    for (double gamma : grid.gammas) {
      const CouplingParams params = CouplingParams::from_gamma(grid.g_drv, gamma);
      const OracleEvolver oracle(params, n + kDefaultCutoffMargin);
      for (AtomBasisLabel initial : grid.cases) {
        const ExcitationBlock block = block_for(initial, n);
        const GlobalState psi0 = initial_product_state(initial, n);
        for (double t : times) {
          const DensityMatrix4 ref = oracle.reduced_at(initial, n, t);
          const auto ref_el = xstate_elements(ref);
          const double ref_conc = concurrence_general(ref);

          // closed form where it exists, the block engine for |gg>
          std::array<double, 5> el;
          double conc;
          if (initial == AtomBasisLabel::EE) {
            const XState x = ee_form(params, n, t);
            el = {x.A, x.B, x.C, x.D, x.E};
            conc = concurrence_x(x);
          } else if (initial == AtomBasisLabel::EG) {
            const XState x = eg_form(params, n, t);
            el = {x.A, x.B, x.C, x.D, x.E};
            conc = concurrence_x(x);
          } else {
            const DensityMatrix4 rho = reduced_general(params, initial, n, t);
            el = xstate_elements(rho);
            conc = concurrence_general(rho);
          }

          for (int e = 0; e < 5; ++e) {
            const double dev = std::abs(el[e] - ref_el[e]);
            report.max_element_deviation[e] = std::max(report.max_element_deviation[e], dev);
            if (dev > tolerance)
              report.outliers.push_back({initial, n, gamma, t, kElementNames[e], dev});
          }
          const double conc_dev = std::abs(conc - ref_conc);
          report.max_concurrence_deviation =
              std::max(report.max_concurrence_deviation, conc_dev);
          if (conc_dev > tolerance)
            report.outliers.push_back({initial, n, gamma, t, "concurrence", conc_dev});

          // analytic propagator applied to the initial block state
          GlobalState prop_state{block,
                                 propagator_analytic(params, block, t) * psi0.amplitudes};
          std::map<int, Eigen::Vector4cd> sectors;
          for (int i = 0; i < block.dim(); ++i) {
            auto [it, ins] =
                sectors.try_emplace(block.basis[i].photons, Eigen::Vector4cd::Zero());
            it->second(static_cast<int>(block.basis[i].label)) += prop_state.amplitudes(i);
          }
          Eigen::Matrix4cd prop_rho = Eigen::Matrix4cd::Zero();
          for (const auto& [m, v] : sectors) prop_rho += v * v.adjoint();
          const double prop_dev = (prop_rho - ref.m).cwiseAbs().maxCoeff();
          report.max_propagator_deviation =
              std::max(report.max_propagator_deviation, prop_dev);
          if (prop_dev > tolerance)
            report.outliers.push_back({initial, n, gamma, t, "propagator", prop_dev});
        }
      }
    }
  }

  report.max_overall = std::max(
      {*std::max_element(report.max_element_deviation.begin(),
                         report.max_element_deviation.end()),
       report.max_concurrence_deviation, report.max_propagator_deviation});
  std::sort(report.outliers.begin(), report.outliers.end(),
            [](const ValidationOutlier& a, const ValidationOutlier& b) {
              return a.deviation > b.deviation;
            });
  report.pass = report.max_overall < tolerance;
  return report;
}

}  // namespace detail

ValidationReport validate_analytic(const GridSpec& grid, double tolerance) {
  return detail::validate_with(
      [](const CouplingParams& p, int n, double t) { return reduced_xstate_ee(p, n, t); },
      [](const CouplingParams& p, int n, double t) { return reduced_xstate_eg(p, n, t); },
      grid, tolerance);
}

}  // namespace ste
