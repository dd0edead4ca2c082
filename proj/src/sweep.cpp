#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ste/analysis.hpp"

// Sweep grids are the hot loop: every (gamma, t) cell is independent, so rows
// are farmed out with OpenMP while the per-cell arithmetic stays identical to
// the serial reference. Output is written into preallocated slots, which
// keeps the result independent of scheduling.

namespace ste {

namespace {

void check_ascending(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument(std::string(name) + " grid must be strictly ascending");
}

// One gamma row: build the engine context once, then walk the time grid.
void sweep_row(const SweepSpec& spec, std::size_t ig, double* conc_row, double* neg_row) {
  const CouplingParams params = CouplingParams::from_gamma(spec.g_drv, spec.gamma_grid[ig]);
  const int cutoff = spec.cutoff >= 0 ? spec.cutoff : spec.n + kDefaultCutoffMargin;
  const std::size_t nt = spec.t_grid.size();

  switch (spec.engine) {
    case Engine::ClosedForm: {
      for (std::size_t j = 0; j < nt; ++j) {
        const XState x = spec.initial == AtomBasisLabel::EE
                             ? reduced_xstate_ee(params, spec.n, spec.t_grid[j])
                             : reduced_xstate_eg(params, spec.n, spec.t_grid[j]);
        conc_row[j] = concurrence_x(x);
        neg_row[j] = negativity(DensityMatrix4{to_matrix(x)});
      }
      break;
    }
    case Engine::Block: {
      for (std::size_t j = 0; j < nt; ++j) {
        const DensityMatrix4 rho =
            spec.state ? reduced_general(params, *spec.state, spec.n, spec.t_grid[j])
                       : reduced_general(params, spec.initial, spec.n, spec.t_grid[j]);
        conc_row[j] = concurrence_general(rho);
        neg_row[j] = negativity(rho);
      }
      break;
    }
    case Engine::Oracle: {
      const OracleEvolver oracle(params, cutoff);
      for (std::size_t j = 0; j < nt; ++j) {
        const DensityMatrix4 rho = oracle.reduced_at(spec.initial, spec.n, spec.t_grid[j]);
        conc_row[j] = concurrence_general(rho);
        neg_row[j] = negativity(rho);
      }
      break;
    }
  }
}

void validate_spec(const SweepSpec& spec) {
  check_ascending(spec.gamma_grid, "gamma");
  check_ascending(spec.t_grid, "t");
  if (!(spec.g_drv > 0.0)) throw std::invalid_argument("sweep: g_drv must be > 0");
  if (spec.n < 0) throw std::invalid_argument("sweep: n must be >= 0");
  if (spec.engine == Engine::ClosedForm && spec.initial != AtomBasisLabel::EE &&
      spec.initial != AtomBasisLabel::EG)
    throw std::invalid_argument("closed-form engine supports ee and eg only");
  if (spec.state && spec.engine != Engine::Block)
    throw std::invalid_argument("sweep: custom atomic states require the block engine");
}

int thread_cap() {
  if (const char* env = std::getenv("STE_ENTANGLE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  return 0;  // implementation default
}

}  // namespace

SweepResult sweep_serial(const SweepSpec& spec) {
  validate_spec(spec);
  const std::size_t ng = spec.gamma_grid.size(), nt = spec.t_grid.size();
  SweepResult result{spec, std::vector<double>(ng * nt), std::vector<double>(ng * nt)};
  for (std::size_t ig = 0; ig < ng; ++ig)
    sweep_row(spec, ig, &result.concurrence[ig * nt], &result.negativity[ig * nt]);
  return result;
}

SweepResult sweep(const SweepSpec& spec) {
  validate_spec(spec);
  const std::size_t ng = spec.gamma_grid.size(), nt = spec.t_grid.size();
  SweepResult result{spec, std::vector<double>(ng * nt), std::vector<double>(ng * nt)};

#ifdef _OPENMP
  const int cap = thread_cap();
  if (cap > 0) omp_set_num_threads(cap);
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t ig = 0; ig < static_cast<std::ptrdiff_t>(ng); ++ig)
    sweep_row(spec, ig, &result.concurrence[ig * nt], &result.negativity[ig * nt]);
  return result;
}

}  // namespace ste
