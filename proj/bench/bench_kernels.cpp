// Kernel benchmark: OpenMP-parallel reductions against their serial
// references. The tiled accumulation performs the same floating point
// operations in the same order regardless of worker count, so every
// comparison here must be bit-identical; any mismatch is a bug and the
// benchmark exits nonzero. Timings are best-of-3 wall clock.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "lacuna/detsum.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/mesh.hpp"
#include "lacuna/poisson.hpp"
#include "lacuna/regularity.hpp"
#include "lacuna/separation.hpp"

using namespace lacuna;

namespace {

int failures = 0;

template <class F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
              identical ? "bit-identical" : "MISMATCH");
  if (!identical) ++failures;
}

}  // namespace

int main() {
  std::printf("workers: %d (cap with LACUNA_THREADS)\n\n", worker_count());

  // arclength weight samples of the M = 2 boundary, the real payload of the
  // boundary seminorm
  LacunaryParams params;
  params.q = 7;
  params.M = 2;
  const std::size_t n = 1u << 15;
  const SeriesEvaluator ev(params, n);
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double F = ev.F(j), f = ev.f(j);
    u[j] = std::sqrt(F * F + f * f);
  }
  const SeminormSpec spec{2.0, 0.25};

  {
    double vs = 0.0, vp = 0.0;
    const double ts = best_of(3, [&] { vs = gagliardo_1d_serial(u, spec); });
    const double tp = best_of(3, [&] { vp = gagliardo_1d(u, spec, true); });
    report("gagliardo_1d (n=32768)", ts, tp, vs == vp);
  }

  {
    const std::size_t m = 1u << 24;
    const auto term = [](std::size_t i) {
      const double x = static_cast<double>(i) * 1e-7;
      return std::log1p(x) / (1.0 + x * x);
    };
    double vs = 0.0, vp = 0.0;
    const double ts = best_of(3, [&] { vs = serial_sum(m, term); });
    const double tp = best_of(3, [&] { vp = tiled_sum(m, term); });
    report("tiled_sum (n=16M)", ts, tp, vs == vp);
  }

  {
    // full 2D seminorm pipeline, one worker vs the OpenMP default
    const Mesh mesh = mesh_polar(params, 256, 32);
    const SolveResult sol = solve_dirichlet(mesh, [](Vec2) { return 1.0; });

    GradSeminormResult r1, rp;
    setenv("LACUNA_THREADS", "1", 1);
    const double ts = best_of(3, [&] { r1 = grad_seminorm_2d(mesh, sol.v, spec); });
    unsetenv("LACUNA_THREADS");
    const double tp = best_of(3, [&] { rp = grad_seminorm_2d(mesh, sol.v, spec); });
    report("grad_seminorm_2d (256x32)", ts, tp,
           r1.value == rp.value && r1.far_pow == rp.far_pow && r1.near_pow == rp.near_pow);
  }

  if (failures) {
    std::printf("\n%d kernel(s) diverged between serial and parallel paths\n", failures);
    return 1;
  }
  std::printf("\nall kernels bit-identical across worker counts\n");
  return 0;
}
