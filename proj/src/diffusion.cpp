#include "fg/diffusion.hpp"

#include <cassert>
#include <cmath>

#include "fg/error.hpp"

namespace fg {

NoiseSchedule NoiseSchedule::linear(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1) throw ValidationError("schedule.timesteps", "need at least one timestep");
  if (!(beta_start > 0) || !(beta_end < 1) || beta_start > beta_end)
    throw ValidationError("schedule.betas", "betas must satisfy 0 < start <= end < 1");
  NoiseSchedule ns;
  ns.timesteps = timesteps;
  ns.beta.resize(timesteps);
  ns.alpha.resize(timesteps);
  ns.alpha_bar.resize(timesteps);
  double prod = 1.0;
  for (int i = 0; i < timesteps; ++i) {
    double frac = timesteps == 1 ? 0.0 : static_cast<double>(i) / (timesteps - 1);
    ns.beta[i] = beta_start + (beta_end - beta_start) * frac;
    ns.alpha[i] = 1.0 - ns.beta[i];
    prod *= ns.alpha[i];
    ns.alpha_bar[i] = prod;
  }
  return ns;
}

double NoiseSchedule::alpha_bar_at(int t) const {
  assert(t >= 0 && t <= timesteps);
  return t == 0 ? 1.0 : alpha_bar[t - 1];
}

void corrupt(const NoiseSchedule& ns, std::span<const double> x0, std::span<const double> eps,
             int t, std::span<double> xt) {
  assert(t >= 1 && t <= ns.timesteps);
  assert(x0.size() == eps.size() && x0.size() == xt.size());
  double abar = ns.alpha_bar_at(t);
  double a = std::sqrt(abar), b = std::sqrt(1.0 - abar);
  for (size_t i = 0; i < x0.size(); ++i) xt[i] = a * x0[i] + b * eps[i];
}

double posterior_variance(const NoiseSchedule& ns, int t) {
  assert(t >= 1 && t <= ns.timesteps);
  double abar_t = ns.alpha_bar_at(t);
  double abar_prev = ns.alpha_bar_at(t - 1);
  return ns.beta[t - 1] * (1.0 - abar_prev) / (1.0 - abar_t);
}

void reverse_step(const NoiseSchedule& ns, std::span<double> x, std::span<const double> eps_hat,
                  int t, const double* z) {
  assert(t >= 1 && t <= ns.timesteps);
  assert(x.size() == eps_hat.size());
  double abar = ns.alpha_bar_at(t);
  double coeff = ns.beta[t - 1] / std::sqrt(1.0 - abar);
  double inv_sqrt_alpha = 1.0 / std::sqrt(ns.alpha[t - 1]);
  double sigma = t > 1 ? std::sqrt(posterior_variance(ns, t)) : 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = inv_sqrt_alpha * (x[i] - coeff * eps_hat[i]);
    if (z && sigma > 0) x[i] += sigma * z[i];
  }
}

void posterior_mean(const NoiseSchedule& ns, std::span<const double> xt,
                    std::span<const double> x0, int t, std::span<double> mu) {
  assert(t >= 1 && t <= ns.timesteps);
  assert(xt.size() == x0.size() && xt.size() == mu.size());
  double abar_t = ns.alpha_bar_at(t);
  double abar_prev = ns.alpha_bar_at(t - 1);
  double beta = ns.beta[t - 1];
  double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar_t);
  double ct = std::sqrt(ns.alpha[t - 1]) * (1.0 - abar_prev) / (1.0 - abar_t);
  for (size_t i = 0; i < xt.size(); ++i) mu[i] = c0 * x0[i] + ct * xt[i];
}

std::vector<double> time_embedding(int t, size_t dim) {
  if (dim < 2 || dim % 2 != 0)
    throw ValidationError("embedding.dim", "time embedding dim must be even and >= 2");
  size_t half = dim / 2;
  std::vector<double> out(dim);
  for (size_t i = 0; i < half; ++i) {
    double w = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
    out[i] = std::sin(t * w);
    out[half + i] = std::cos(t * w);
  }
  return out;
}

}  // namespace fg
