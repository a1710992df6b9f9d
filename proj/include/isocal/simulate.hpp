#pragma once

#include <cstdint>

#include "isocal/rng.hpp"
#include "isocal/types.hpp"

namespace isocal {

// Six synthetic right-censoring settings. Covariates are uniform on [0,4]^p
// (p = 1 for settings 1-4, p = 10 for 5-6), log event times are conditionally
// normal, censoring is exponential or log-normal:
//   1: mu = 0.632 x,                sigma = 2,         C ~ Exp(0.1)
//   2: mu = 3 if x>2 else x,        sigma = 0.5,       C ~ Exp(0.1)
//   3: mu = 2 if x>2 else x,        sigma = 0.5,       C ~ Exp(0.25+(6+x)/100)
//   4: mu = 3 if x>2 else 1.5x,     sigma = 0.5,       C ~ LogN(2+(2-x)/50, 0.5)
//   5: mu = 0.126(x1+sqrt(x3 x5))+1, sigma = 1,        C ~ Exp(x10/10+1/20)
//   6: same mu,                     sigma = (x2+2)/4,  same C
// Exponential rates are rate parameters (mean 1/rate).

int setting_dim(int setting);

double setting_mu(int setting, const double* x);
double setting_sigma(int setting, const double* x);

// True conditional survival of the event time, P(T > t | x); 1 at t <= 0.
double oracle_survival(int setting, const double* x, double t);
// True conditional survival of the censoring time, P(C > t | x).
double oracle_censoring(int setting, const double* x, double t);

// One event / censor draw at fixed covariates, consuming the generator in
// the documented order (one normal for T; one uniform for exponential C or
// one normal for log-normal C).
double draw_event_time(int setting, const double* x, SplitMix64& g);
double draw_censor_time(int setting, const double* x, SplitMix64& g);

struct SimulatedData {
  SurvivalDataset data;
  SimulationTruths truths;
};

// Row i draws from substream(seed, i) in the order covariates, T, C, so the
// output is identical for any thread count and any n prefix.
SimulatedData generate(int setting, int n, std::uint64_t seed);

}  // namespace isocal
