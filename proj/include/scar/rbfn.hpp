#pragma once

#include "scar/sast.hpp"
#include "scar/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace scar {

// Target patterns: cluster k (1-based) encodes k-1 in binary, MSB first,
// bit 0 mapped to -1. width = ceil(log2 K).
Vector encode_pattern(int k, int width);
int decode_pattern(const Vector& outputs, int k_count);

struct PatternCodebook {
    int k_count = 0;
    int width = 0;
    explicit PatternCodebook(int k);
    Vector pattern(int k) const { return encode_pattern(k, width); }
};

struct RbfnModel {
    Matrix centers; // K x N, fixed after construction
    Matrix weights; // K x O
    double sigma = 0.1;
    double eta = 0.1;
};

RbfnModel make_rbfn(const Matrix& centers, double sigma, double eta, Rng& rng);

Vector hidden_activations(const RbfnModel& model, const Vector& y);
Vector forward(const RbfnModel& model, const Vector& y);
double mse_error(const Vector& pattern, const Vector& outputs);

// one delta-rule step on the output weights; centers and sigma stay fixed
void backprop_update(RbfnModel& model, const Vector& y, const Vector& pattern);

int classify(const RbfnModel& model, const Vector& y);

struct LabeledSample {
    Vector y;
    int cluster = 1; // 1-based
};

using SampleStream = std::function<LabeledSample()>;

std::vector<LabeledSample> label_by_nearest(const Matrix& points, const Matrix& centers);

double mean_error(const RbfnModel& model, const std::vector<LabeledSample>& samples);
double classification_accuracy(const RbfnModel& model,
                               const std::vector<LabeledSample>& samples);

enum class RbfnTrainMode { Sast, Plain };

struct RbfnTrainConfig {
    long total_iters = 20000;
    int iters_per_run = 200;
    AnnealingSchedule schedule{1.0, 0.99, 0.8, 200};
    TunnelingParams tunneling{0.1};
    RbfnTrainMode mode = RbfnTrainMode::Sast;
};

struct RbfnTrainResult {
    RbfnModel model;
    double best_error = 0.0;
    std::vector<double> error_trace; // post-update error per iteration
};

// Annealed stream/labeled training. The trainer alternates between the
// unlabeled environment stream and the labeled pool based on a Metropolis
// test over consecutive tunneled errors, and accepts or rolls back the
// epoch's weights the same way. Returns the minimum-error weights ever seen.
RbfnTrainResult sast_train(const RbfnModel& init, const std::vector<LabeledSample>& labeled,
                           const SampleStream& stream, const RbfnTrainConfig& config,
                           Rng& rng);

struct SweepRow {
    int m = 0;
    int k = 0;
    double sigma = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    double final_error = 0.0;
};

std::vector<SweepRow> hyperparameter_sweep(const Matrix& centers, int m,
                                           const std::vector<LabeledSample>& train_pool,
                                           const std::vector<LabeledSample>& validation,
                                           const std::vector<double>& sigmas,
                                           const std::vector<double>& etas,
                                           const RbfnTrainConfig& base, std::uint64_t seed);

void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

void save_rbfn(const std::string& path, const RbfnModel& model, int m);
RbfnModel load_rbfn(const std::string& path, int* m_out = nullptr);

} // namespace scar
