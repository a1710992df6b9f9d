#include "isocal/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "isocal/mathutil.hpp"
#include "isocal/threads.hpp"

namespace isocal {

namespace {

void check_setting(int setting) {
  if (setting < 1 || setting > 6)
    throw std::invalid_argument("simulate: setting must be in 1..6, got " +
                                std::to_string(setting));
}

// Censoring mechanism parameters for one subject.
struct CensorLaw {
  bool lognormal;
  double a;  // Exp rate, or log-normal location
  double b;  // unused, or log-normal scale
};

CensorLaw censor_law(int setting, const double* x) {
  switch (setting) {
    case 1:
    case 2:
      return {false, 0.1, 0.0};
    case 3:
      return {false, 0.25 + (6.0 + x[0]) / 100.0, 0.0};
    case 4:
      return {true, 2.0 + (2.0 - x[0]) / 50.0, 0.5};
    default:  // 5, 6
      return {false, x[9] / 10.0 + 1.0 / 20.0, 0.0};
  }
}

}  // namespace

int setting_dim(int setting) {
  check_setting(setting);
  return setting <= 4 ? 1 : 10;
}

double setting_mu(int setting, const double* x) {
  switch (setting) {
    case 1:
      return 0.632 * x[0];
    case 2:
      return x[0] > 2.0 ? 3.0 : x[0];
    case 3:
      return x[0] > 2.0 ? 2.0 : x[0];
    case 4:
      return x[0] > 2.0 ? 3.0 : 1.5 * x[0];
    case 5:
    case 6:
      return 0.126 * (x[0] + std::sqrt(x[2] * x[4])) + 1.0;
    default:
      check_setting(setting);
      return 0.0;
  }
}

double setting_sigma(int setting, const double* x) {
  switch (setting) {
    case 1:
      return 2.0;
    case 2:
    case 3:
    case 4:
      return 0.5;
    case 5:
      return 1.0;
    case 6:
      return (x[1] + 2.0) / 4.0;
    default:
      check_setting(setting);
      return 0.0;
  }
}

double oracle_survival(int setting, const double* x, double t) {
  check_setting(setting);
  if (t <= 0.0) return 1.0;
  const double z =
      (std::log(t) - setting_mu(setting, x)) / setting_sigma(setting, x);
  return 1.0 - normal_cdf(z);
}

double oracle_censoring(int setting, const double* x, double t) {
  check_setting(setting);
  if (t <= 0.0) return 1.0;
  const CensorLaw law = censor_law(setting, x);
  if (law.lognormal) return 1.0 - normal_cdf((std::log(t) - law.a) / law.b);
  return std::exp(-law.a * t);
}

double draw_event_time(int setting, const double* x, SplitMix64& g) {
  check_setting(setting);
  return std::exp(setting_mu(setting, x) +
                  setting_sigma(setting, x) * g.normal());
}

double draw_censor_time(int setting, const double* x, SplitMix64& g) {
  check_setting(setting);
  const CensorLaw law = censor_law(setting, x);
  if (law.lognormal) return std::exp(law.a + law.b * g.normal());
  return g.exponential(law.a);
}

SimulatedData generate(int setting, int n, std::uint64_t seed) {
  check_setting(setting);
  if (n < 1) throw std::invalid_argument("simulate: n must be positive");
  const int p = setting_dim(setting);

  SimulatedData out;
  out.data.p = p;
  out.data.id.resize(n);
  out.data.time.resize(n);
  out.data.event.resize(n);
  out.data.x.resize(static_cast<std::size_t>(n) * p);
  out.truths.id.resize(n);
  out.truths.true_time.resize(n);
  out.truths.censor_time.resize(n);
  out.truths.mu.resize(n);
  out.truths.sigma.resize(n);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < n; ++i) {
    SplitMix64 g = substream(seed, static_cast<std::uint64_t>(i));
    double* xi = out.data.x.data() + static_cast<std::size_t>(i) * p;
    for (int k = 0; k < p; ++k) xi[k] = g.uniform(0.0, 4.0);
    const double t = draw_event_time(setting, xi, g);
    const double c = draw_censor_time(setting, xi, g);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%07d", i);
    out.data.id[i] = buf;
    out.data.time[i] = std::min(t, c);
    out.data.event[i] = t <= c ? 1 : 0;
    out.truths.id[i] = buf;
    out.truths.true_time[i] = t;
    out.truths.censor_time[i] = c;
    out.truths.mu[i] = setting_mu(setting, xi);
    out.truths.sigma[i] = setting_sigma(setting, xi);
  }

  out.data.validate();
  return out;
}

}  // namespace isocal
