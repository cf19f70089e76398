// Benchmark comparing the OpenMP assembly kernels against their serial
// references. Usage: shapegrad_bench [disk_n] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "shapegrad/momentum_tensor.hpp"
#include "shapegrad/parallel.hpp"
#include "shapegrad/serial_ref.hpp"
#include "shapegrad/solver.hpp"

using namespace shapegrad;

namespace {

template <class Fn>
double time_best_ms(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    best = std::min(best, ms);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  par::configure_from_env();
  const int n = argc > 1 ? std::atoi(argv[1]) : 48;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  const auto mesh = SimplicialMesh::disk(1.0, n);
  const auto f = ConvexIntegrand::quadratic(1.0, 2);
  const auto g = ScalarIntegrand::linear(1.0);

  std::mt19937 rng(12345u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  P1Function u = P1Function::zeros(mesh, ProblemCase::Neumann);
  for (auto& x : u.dof) x = dist(rng);
  P0VectorField sigma = P0VectorField::zeros(mesh);
  for (auto& s : sigma.value) s = {dist(rng), dist(rng)};
  const auto v = VelocityField::dilation(mesh);
  const auto a = tensor_A(u, sigma, f, g);

  std::printf("disk(1,%d): %d elements, %d vertices, %d threads\n", n, mesh.num_simplices(),
              mesh.num_vertices(), par::max_threads());
  std::printf("%-24s %10s %10s %9s %12s\n", "kernel", "serial ms", "omp ms", "speedup",
              "max |diff|");

  {
    double e_par = 0.0, e_ser = 0.0;
    const double ms_ser =
        time_best_ms(reps, [&] { e_ser = serial::primal_energy(mesh, f, g, u); });
    const double ms_par = time_best_ms(reps, [&] { e_par = primal_energy(mesh, f, g, u); });
    std::printf("%-24s %10.3f %10.3f %8.2fx %12.3e\n", "primal_energy", ms_ser, ms_par,
                ms_ser / ms_par, std::abs(e_par - e_ser));
  }
  {
    DiscreteDivergence d_par, d_ser;
    const double ms_ser =
        time_best_ms(reps, [&] { d_ser = serial::weak_divergence(sigma, ProblemCase::Neumann); });
    const double ms_par =
        time_best_ms(reps, [&] { d_par = weak_divergence(sigma, ProblemCase::Neumann); });
    double worst = 0.0;
    for (std::size_t i = 0; i < d_par.value.size(); ++i) {
      worst = std::max(worst, std::abs(d_par.value[i] - d_ser.value[i]));
    }
    std::printf("%-24s %10.3f %10.3f %8.2fx %12.3e\n", "weak_divergence", ms_ser, ms_par,
                ms_ser / ms_par, worst);
  }
  {
    double v_par = 0.0, v_ser = 0.0;
    const double ms_ser = time_best_ms(reps, [&] { v_ser = serial::volume_form(a, v); });
    const double ms_par = time_best_ms(reps, [&] { v_par = volume_form(a, v); });
    std::printf("%-24s %10.3f %10.3f %8.2fx %12.3e\n", "volume_form", ms_ser, ms_par,
                ms_ser / ms_par, std::abs(v_par - v_ser));
  }
  {
    double r_par = 0.0, r_ser = 0.0;
    const double ms_ser =
        time_best_ms(reps, [&] { r_ser = serial::conservation_max_residual(a, mesh); });
    const double ms_par =
        time_best_ms(reps, [&] { r_par = conservation_residual(a, mesh).max_residual; });
    std::printf("%-24s %10.3f %10.3f %8.2fx %12.3e\n", "conservation_probes", ms_ser, ms_par,
                ms_ser / ms_par, std::abs(r_par - r_ser));
  }
  {
    // full solve (CG): dominated by SpMV and the deterministic reductions
    const double ms = time_best_ms(std::max(1, reps / 2), [&] {
      const auto sol = solve_primal(mesh, f, g, ProblemCase::Dirichlet);
      (void)sol;
    });
    std::printf("%-24s %10s %10.3f\n", "solve_primal (cg)", "-", ms);
  }
  return 0;
}
