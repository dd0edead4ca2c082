#include <cstdio>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ste/analysis.hpp"

// Compares the serial reference sweep against the OpenMP kernel on a
// figure-sized grid, per engine, and checks that the outputs match exactly.

namespace {

double now() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return 0.0;
#endif
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

}  // namespace

int main() {
  const double pi = 3.14159265358979323846;
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  struct Job {
    const char* name;
    ste::Engine engine;
    ste::AtomBasisLabel initial;
    int n;
  };
  const Job jobs[] = {
      {"closed-form ee n=1", ste::Engine::ClosedForm, ste::AtomBasisLabel::EE, 1},
      {"block       eg n=3", ste::Engine::Block, ste::AtomBasisLabel::EG, 3},
      {"oracle      ee n=1", ste::Engine::Oracle, ste::AtomBasisLabel::EE, 1},
  };

  for (const Job& job : jobs) {
    ste::SweepSpec spec;
    spec.initial = job.initial;
    spec.n = job.n;
    spec.engine = job.engine;
    spec.gamma_grid = linspace(0.0, 1.0, 101);
    spec.t_grid = linspace(0.0, 4.0 * pi, 401);

    const double t0 = now();
    const ste::SweepResult serial = ste::sweep_serial(spec);
    const double t1 = now();
    const ste::SweepResult parallel = ste::sweep(spec);
    const double t2 = now();

    double max_diff = 0.0;
    for (std::size_t i = 0; i < serial.concurrence.size(); ++i)
      max_diff = std::max(max_diff,
                          std::abs(serial.concurrence[i] - parallel.concurrence[i]));

    std::printf("%s  serial %7.3f s  parallel %7.3f s  speedup %5.2fx  max|diff| %g\n",
                job.name, t1 - t0, t2 - t1,
                (t2 - t1) > 0 ? (t1 - t0) / (t2 - t1) : 0.0, max_diff);
    if (max_diff != 0.0) {
      std::printf("FAIL: parallel kernel deviates from the serial reference\n");
      return 1;
    }
  }
  return 0;
}
