// Timing comparison between the serial reference kernel and the OpenMP-parallel one,
// plus a bitwise-equality check of their states. Not part of the test suite.
#include <chrono>
#include <cstdio>
#include <vector>

#include "lidskii/contour.hpp"
#include "lidskii/operators.hpp"
#include "lidskii/parallel.hpp"
#include "lidskii/solver.hpp"
#include "lidskii/spectral.hpp"

using namespace lidskii;

namespace {

double time_solve(const EvolutionProblem& p, const Contour& c, KernelMode mode, int reps,
                  SolutionResult* out) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    SolutionResult res = solve_contour(p, c, 1e-8, mode);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs < best) best = secs;
    if (out) *out = std::move(res);
  }
  return best;
}

}  // namespace

int main() {
  apply_thread_cap_from_env();

  const int n_points = 256;
  const GridSpec g = make_grid(0.0, 1.0, n_points);
  const DiscretizedOperator w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  std::vector<cplx> evs(sd.eigenvalues.data(), sd.eigenvalues.data() + sd.eigenvalues.size());

  EvolutionProblem p;
  p.op = w;
  p.mode.n = 1;
  p.initial = Vec::Unit(n_points, n_points / 2);
  p.times = {0.1, 0.5, 1.0};
  const Contour c = auto_contour(evs, 1.0, p.times, 1e-8);
  {
    // One untimed warm-up for allocator and cache effects.
    SolutionResult warm = solve_contour(p, c, 1e-8, KernelMode::parallel);
    (void)warm;
  }

  SolutionResult rs, rp;
  const double ts = time_solve(p, c, KernelMode::serial, 3, &rs);
  const double tp = time_solve(p, c, KernelMode::parallel, 3, &rp);

  bool identical = rs.states.size() == rp.states.size();
  for (std::size_t i = 0; identical && i < rs.states.size(); ++i)
    identical = (rs.states[i] - rp.states[i]).cwiseAbs().maxCoeff() == 0.0;

  std::printf("dimension            %d, %d quadrature nodes, %zu times\n", n_points,
              rs.diagnostics.node_count, p.times.size());
  std::printf("serial kernel        %8.2f ms\n", ts * 1e3);
  std::printf("parallel kernel      %8.2f ms  (%d threads)\n", tp * 1e3,
              active_thread_count());
  std::printf("speedup              %8.2fx\n", ts / tp);
  std::printf("bitwise identical    %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
