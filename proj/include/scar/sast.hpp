#pragma once

#include <span>

namespace scar {

// Stochastic-tunneling transform and annealing schedule shared by the
// clustering and RBFN trainers. The transform maps a raw cost f >= f_best
// into [0, 1); differences of transformed costs drive the Metropolis
// acceptance rule.

struct TunnelingParams {
    double omega = 0.02;
};

struct AnnealingSchedule {
    double temperature = 1.0;
    double cooling_rate = 0.95;     // in (0, 1)
    double initial_acceptance = 0.5; // in (0, 1)
    int sample_length = 10;          // transitions sampled for the initial temperature
};

inline constexpr double kMinInitialTemperature = 1e-6;

// F(X) = 1 - exp(-(f(X) - f_best) / omega)
double tunneling_energy(double energy, double best_energy, const TunnelingParams& params);

// P = min(1, exp(-(f_a - f_b) / T)), f_a the candidate, f_b the reference
double acceptance_probability(double f_a, double f_b, double temperature);

// T0 = mean(|deltas|) / -ln(p0), floored at kMinInitialTemperature
double initial_temperature(std::span<const double> deltas, double initial_acceptance);

AnnealingSchedule cool(const AnnealingSchedule& schedule);

// true = accept candidate a over reference b given one uniform draw
bool metropolis_step(double f_a, double f_b, const AnnealingSchedule& schedule,
                     double uniform_draw);

} // namespace scar
