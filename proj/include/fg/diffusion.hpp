#pragma once

#include <span>
#include <vector>

namespace fg {

// Denoising-diffusion machinery with a linear beta ramp and epsilon
// prediction. Timesteps are 1-based: t runs over [1, timesteps] and index
// t-1 addresses the arrays below. alpha_bar[t-1] is the cumulative product
// through step t; "alpha_bar at t=0" is defined as 1.
struct NoiseSchedule {
  int timesteps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  static NoiseSchedule linear(int timesteps = 100, double beta_start = 1e-4,
                              double beta_end = 0.02);

  double alpha_bar_at(int t) const;  // t in [0, timesteps]
};

// Forward corruption: xt = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
void corrupt(const NoiseSchedule& ns, std::span<const double> x0, std::span<const double> eps,
             int t, std::span<double> xt);

// One reverse step, in place:
//   x <- (x - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t * z
// where sigma_t^2 is the posterior variance (0 at t=1). z may be null for a
// deterministic step.
void reverse_step(const NoiseSchedule& ns, std::span<double> x, std::span<const double> eps_hat,
                  int t, const double* z);

// Posterior variance beta_t * (1 - abar_{t-1}) / (1 - abar_t).
double posterior_variance(const NoiseSchedule& ns, int t);

// Independent route used by tests: the posterior mean written directly in
// terms of (x0, xt) instead of the epsilon parameterization.
void posterior_mean(const NoiseSchedule& ns, std::span<const double> xt,
                    std::span<const double> x0, int t, std::span<double> mu);

// Sinusoidal embedding of an integer timestep: first dim/2 entries are
// sin(t * w_i), the rest cos(t * w_i), with w_i = 10000^(-i / (dim/2)).
std::vector<double> time_embedding(int t, size_t dim);

}  // namespace fg
