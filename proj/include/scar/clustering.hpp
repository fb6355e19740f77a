#pragma once

#include "scar/kn_tree.hpp"
#include "scar/preprocess.hpp"
#include "scar/sast.hpp"
#include "scar/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scar {

// KN: tree-filtered Lloyd steps with random restarts.
// RS: random single-center swaps.
// RSKN: one swap then Lloyd steps per run.
// SA / SAST: annealed mix of swaps and Lloyd steps; SAST compares
// tunneled costs, SA raw ones.
enum class ClusterMethod { KN, RS, RSKN, SA, SAST };

std::string method_name(ClusterMethod method);
ClusterMethod method_from_name(const std::string& name);

struct ClusterConfig {
    int max_iters_per_run = 10;
    int total_iters = 1000;
    double min_improvement = 0.1; // relative to the run-initial distortion
    AnnealingSchedule schedule{1.0, 0.95, 0.5, 10};
    TunnelingParams tunneling{0.02};
    ClusterMethod method = ClusterMethod::SAST;
};

double distortion(const Matrix& points, const Matrix& centers);
double distortion(const KnTree& tree, const Matrix& centers);

// k distinct dataset rows, uniform without replacement
Matrix random_centers(const Matrix& points, int k, Rng& rng);

// one assignment + centroid update; empty centers are re-seeded at the point
// farthest from its nearest center, one at a time, so the step never
// increases distortion
Matrix lloyd_iteration(const KnTree& tree, const Matrix& centers);

struct TracePoint {
    int iteration = 0;
    int run = 0;
    bool random_step = false;
    double distortion = 0.0;
    double best_distortion = 0.0;
    double temperature = 0.0;
};

struct ClusterResult {
    Matrix centers;
    double distortion = 0.0;
    std::vector<TracePoint> trace;
};

ClusterResult cluster(const Matrix& points, int k, const ClusterConfig& config, Rng& rng);

// 1-based index of the unit vector nearest to the center
int nearest_level_index(const Vector& center);

// rows sorted by nearest_level_index (stable)
Matrix order_centers(const Matrix& centers);

struct CenterSet {
    Matrix centers;
    int m = 0;
};

void save_centers(const std::string& path, const CenterSet& centers);
CenterSet load_centers(const std::string& path);

struct BenchmarkRow {
    ClusterMethod method = ClusterMethod::KN;
    int m = 0;
    int k = 0;
    std::uint64_t seed = 0;
    double distortion = 0.0;
    double cpu_seconds = 0.0;
};

std::vector<BenchmarkRow> benchmark_methods(const Dataset& dataset,
                                            const std::vector<int>& k_values,
                                            const std::vector<ClusterMethod>& methods,
                                            const std::vector<std::uint64_t>& seeds,
                                            const ClusterConfig& base);

void save_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows);

} // namespace scar
