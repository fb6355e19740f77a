#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace scar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Deterministic RNG wrapper. std::mt19937_64 gives a portable bit stream,
// but the std distributions are implementation-defined, so the draw
// functions are written out here to keep outputs bit-identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // uniform integer in [0, n), n > 0
    std::size_t uniform_below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    // standard normal, Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // decorrelated child stream (splitmix64 over the raw draw)
    Rng split() {
        std::uint64_t z = gen_() + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace scar
