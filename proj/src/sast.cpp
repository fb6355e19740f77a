#include "scar/sast.hpp"

#include <cmath>
#include <stdexcept>

namespace scar {

double tunneling_energy(double energy, double best_energy, const TunnelingParams& params) {
    if (params.omega <= 0.0)
        throw std::invalid_argument("tunneling_energy: omega must be positive");
    if (energy < best_energy)
        throw std::invalid_argument("tunneling_energy: energy below reference best");
    return 1.0 - std::exp(-(energy - best_energy) / params.omega);
}

double acceptance_probability(double f_a, double f_b, double temperature) {
    if (temperature <= 0.0)
        throw std::invalid_argument("acceptance_probability: temperature must be positive");
    if (f_a <= f_b) return 1.0;
    return std::exp(-(f_a - f_b) / temperature);
}

double initial_temperature(std::span<const double> deltas, double initial_acceptance) {
    if (deltas.empty())
        throw std::invalid_argument("initial_temperature: no transition samples");
    if (initial_acceptance <= 0.0 || initial_acceptance >= 1.0)
        throw std::invalid_argument("initial_temperature: acceptance must be in (0, 1)");
    double sum = 0.0;
    for (double d : deltas) sum += std::abs(d);
    const double mean = sum / static_cast<double>(deltas.size());
    const double t0 = -mean / std::log(initial_acceptance);
    return t0 > kMinInitialTemperature ? t0 : kMinInitialTemperature;
}

AnnealingSchedule cool(const AnnealingSchedule& schedule) {
    if (schedule.cooling_rate <= 0.0 || schedule.cooling_rate >= 1.0)
        throw std::invalid_argument("cool: cooling rate must be in (0, 1)");
    AnnealingSchedule next = schedule;
    next.temperature = schedule.temperature * schedule.cooling_rate;
    return next;
}

bool metropolis_step(double f_a, double f_b, const AnnealingSchedule& schedule,
                     double uniform_draw) {
    return acceptance_probability(f_a, f_b, schedule.temperature) > uniform_draw;
}

} // namespace scar
