// Compares the serial reference kernels against the OpenMP versions on
// denoiser-sized and larger shapes, and checks that both produce identical
// bytes. Build and run: cmake --build build --target bench_kernels &&
// ./build/bench/bench_kernels

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "fg/kernels.hpp"
#include "fg/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename Fn>
double time_ms(const Fn& fn, int reps) {
  fn();  // warm-up
  auto start = clock_type::now();
  for (int i = 0; i < reps; ++i) fn();
  auto stop = clock_type::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

struct Shape {
  size_t m, k, n;
  int reps;
};

}  // namespace

int main() {
  fg::Rng rng(20240817);
  const Shape shapes[] = {
      {16, 676, 256, 200},   // denoiser first layer, batch 16
      {16, 256, 256, 200},   // hidden layer
      {1, 676, 256, 400},    // sampling (batch 1)
      {128, 512, 512, 20},   // larger, parallelism-friendly
      {256, 1024, 1024, 5},
  };

  std::printf("%-22s %12s %12s %9s %6s\n", "matmul_nt shape", "serial (ms)", "openmp (ms)",
              "speedup", "equal");
  for (const Shape& s : shapes) {
    std::vector<double> a(s.m * s.k), b(s.n * s.k);
    std::vector<double> c_ref(s.m * s.n), c_par(s.m * s.n);
    for (double& v : a) v = rng.uniform() - 0.5;
    for (double& v : b) v = rng.uniform() - 0.5;

    double t_ref = time_ms([&] { fg::ref::matmul_nt(a.data(), b.data(), c_ref.data(), s.m, s.k, s.n); }, s.reps);
    double t_par = time_ms([&] { fg::kern::matmul_nt(a.data(), b.data(), c_par.data(), s.m, s.k, s.n); }, s.reps);
    bool equal = std::memcmp(c_ref.data(), c_par.data(), c_ref.size() * sizeof(double)) == 0;

    char label[64];
    std::snprintf(label, sizeof(label), "%zux%zu * %zux%zu", s.m, s.k, s.n, s.k);
    std::printf("%-22s %12.3f %12.3f %8.2fx %6s\n", label, t_ref, t_par,
                t_ref / (t_par > 0 ? t_par : 1e-9), equal ? "yes" : "NO");
    if (!equal) return 1;
  }
  std::printf("\nworkers: %d\n", fg::worker_count());
  return 0;
}
