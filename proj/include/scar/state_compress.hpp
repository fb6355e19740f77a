#pragma once

#include "scar/preprocess.hpp"
#include "scar/rbfn.hpp"
#include "scar/types.hpp"

#include <span>
#include <vector>

namespace scar {

// Fraction of users per cluster. Entries sum to (#classified / user_count),
// so at most 1; users without a report leave mass unassigned.
Vector classify_population(const std::vector<Vector>& histograms, const RbfnModel& model,
                           int user_count);

struct CompressedFeatures {
    int active_classes = 0;      // clusters with nonzero share
    double dispersion = 0.0;     // mean squared deviation from uniform share
    double support_distance = 0.0; // distance to the nearest one-hot share vector
    int support_index = 1;       // 1-based index of that one-hot vector
};

// all-zero share vector maps to the sentinel (0, 0, 1, 1)
CompressedFeatures extract_features(const Vector& shares);

struct ControllerState {
    double alpha_prev = 1.0;
    double beta_prev = 1.0;
    double thr_mean = 0.0;
    double thr_std = 0.0;
    CompressedFeatures features;
    int active_users = 0;
};

ControllerState build_state(double alpha_prev, double beta_prev,
                            std::span<const double> throughputs,
                            const CompressedFeatures& features, int active_users);

struct StateNormalization {
    int k_count = 64;
    double thr_max = 12.0; // Mbps
    int max_users = 20;
};

// 9 entries, each min-max scaled into [0, 1]
Vector normalized_state(const ControllerState& state, const StateNormalization& norm);

enum class StateMode { Compressed, RawHistograms };

// Glue used by the controller: turns one TTI's reports and throughput
// averages into the network input, either through the classifier or as raw
// per-bin statistics (the no-compression ablation).
struct StateBuilder {
    RbfnModel model;
    int m = 3;
    StateMode mode = StateMode::Compressed;
    StateNormalization norm;

    int dim() const;
    Vector build(double alpha_prev, double beta_prev, const std::vector<CqiReport>& reports,
                 std::span<const double> throughputs) const;
};

} // namespace scar
