#ifndef STE_ANALYSIS_HPP
#define STE_ANALYSIS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ste/dynamics.hpp"
#include "ste/entanglement.hpp"

namespace ste {

enum class Engine { ClosedForm, Block, Oracle };

std::string engine_name(Engine e);
std::optional<Engine> engine_from_name(const std::string& name);

// Detection thresholds: entangled when above 1e-6, treated as zero below
// 1e-9; both sit well clear of the 1e-10 engine-agreement scale.
inline constexpr double kEntangledThreshold = 1e-6;
inline constexpr double kZeroThreshold = 1e-9;

// Reduced two-atom state from the selected engine. ClosedForm supports the
// EE and EG families only.
DensityMatrix4 reduced_state(Engine engine, const CouplingParams& params,
                             AtomBasisLabel initial, int n, double t, int cutoff);

// --- critical coupling points ------------------------------------------------

struct CriticalPoint {
  AtomBasisLabel initial;  // EE or EG
  int n;
  double gamma_crit;
  double g_stm_crit;  // in units of g_drv
};

// EE: gamma_0 = sqrt((n+1)/(n+2)); EG: gamma_0 = sqrt(n/(n+1)).
CriticalPoint critical_point(AtomBasisLabel initial, int n);

// Samples gamma_0 +- 0.02 and checks the on/off behavior of the maximum
// concurrence over one period: EE entangles strictly below gamma_0, EG on
// both sides of it (and not at it).
bool verify_critical(AtomBasisLabel initial, int n, Engine engine);

// --- entanglement period -----------------------------------------------------

enum class PeriodMethod { AnalyticXi, ZeroCrossing };

struct PeriodEstimate {
  AtomBasisLabel initial;
  int n;
  double gamma;
  double period;
  PeriodMethod method;
};

// Period of the concurrence signal (spacing after which the lobe pattern
// repeats). AnalyticXi uses 2 pi/(g xi) for EE (halving to pi/(g xi) at
// gamma = 0, where the signal degenerates to an exact sine square) and
// pi/(g xi) for EG. ZeroCrossing measures the oracle's concurrence directly.
// Returns nullopt with a reason when the concurrence is identically zero
// ("no entanglement") or the dynamics are frozen ("frozen dynamics").
std::optional<PeriodEstimate> period(AtomBasisLabel initial, const CouplingParams& params,
                                     int n, PeriodMethod method,
                                     std::string* no_period_reason = nullptr);

// --- parameter sweeps ----------------------------------------------------------

struct SweepSpec {
  AtomBasisLabel initial = AtomBasisLabel::EE;
  std::optional<Eigen::Vector4cd> state;  // overrides initial when set (Block engine)
  int n = 0;
  double g_drv = 1.0;
  std::vector<double> gamma_grid;  // strictly ascending
  std::vector<double> t_grid;      // strictly ascending
  Engine engine = Engine::Block;
  int cutoff = -1;  // <0: n + 6
};

struct SweepResult {
  SweepSpec spec;
  // gamma-major storage: value(i_gamma, i_t) = data[i_gamma * n_t + i_t]
  std::vector<double> concurrence;
  std::vector<double> negativity;

  double conc(std::size_t ig, std::size_t it) const {
    return concurrence[ig * spec.t_grid.size() + it];
  }
  double neg(std::size_t ig, std::size_t it) const {
    return negativity[ig * spec.t_grid.size() + it];
  }
};

// OpenMP-parallel over gamma rows; cell arithmetic is identical to the serial
// reference, so results match it exactly. STE_ENTANGLE_THREADS caps the
// thread count when set.
SweepResult sweep(const SweepSpec& spec);

// Serial reference implementation, kept for equivalence tests and benchmarks.
SweepResult sweep_serial(const SweepSpec& spec);

// --- lumbar region (|gg> initial state) -----------------------------------------

struct LumbarCell {
  std::size_t gamma_index;
  std::size_t t_index;
  double gamma;
  double t;
  double concurrence;
  double baseline;  // concurrence at gamma = 1 for the same t
};

struct LumbarRegion {
  std::vector<LumbarCell> cells;
  bool degenerate_block = false;  // n < 2: the chain is shorter than 3 levels
};

// Cells where the |gg> concurrence exceeds 1e-6 while the no-STE baseline
// (gamma = 1) stays below 1e-9: entanglement attributable to the stimulated
// channel only.
LumbarRegion lumbar_region(int n, const std::vector<double>& gamma_grid,
                           const std::vector<double>& t_grid, double g_drv = 1.0);

// --- closed-form vs oracle validation ---------------------------------------------

struct GridSpec {
  std::string version = "std-grid-v1";
  std::vector<AtomBasisLabel> cases = {AtomBasisLabel::EE, AtomBasisLabel::EG,
                                       AtomBasisLabel::GG};
  std::vector<int> ns = {0, 1, 3};
  std::vector<double> gammas = {0.0, 0.3, 0.7071, 1.0};
  int t_points = 200;
  double t_min = 0.0;
  double t_max = 4.0 * 3.14159265358979323846;
  double g_drv = 1.0;

  static GridSpec standard() { return {}; }
  std::vector<double> t_grid() const;
};

struct ValidationOutlier {
  AtomBasisLabel initial;
  int n;
  double gamma;
  double t;
  std::string element;  // "A".."E" or "concurrence"
  double deviation;
};

struct ValidationReport {
  GridSpec grid;
  double tolerance = 1e-8;
  std::array<double, 5> max_element_deviation{};  // A, B, C, D, E
  double max_concurrence_deviation = 0.0;
  double max_propagator_deviation = 0.0;  // propagator-evolved reduced vs oracle
  double max_overall = 0.0;
  std::vector<ValidationOutlier> outliers;  // sorted descending by deviation
  bool pass = false;
};

// Compares the closed-form EE/EG families (block engine for GG) and the
// analytic propagator against the full-space oracle over the grid.
ValidationReport validate_analytic(const GridSpec& grid, double tolerance = 1e-8);

namespace detail {
// Closed-form evaluator seam so tests can inject a corrupted one.
using XStateFn = std::function<XState(const CouplingParams&, int, double)>;
ValidationReport validate_with(const XStateFn& ee_form, const XStateFn& eg_form,
                               const GridSpec& grid, double tolerance);
}  // namespace detail

}  // namespace ste

#endif
