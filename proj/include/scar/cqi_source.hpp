#pragma once

#include "scar/preprocess.hpp"
#include "scar/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace scar {

struct ChannelConfig {
    int num_rbs = 12;
    int cqi_levels = 15;
    int num_users = 20;
    double speed_kmh = 120.0;
    double carrier_hz = 2.0e9;
    int num_paths = 12;
    double tx_power_dbm = 43.0;
    double noise_figure_db = 2.5;
    double penetration_loss_db = 10.0;
    double shadowing_sigma_db = 8.0;
    double min_distance_km = 0.1;
    double max_distance_km = 2.0;
    std::uint64_t seed = 1;
};

// SINR thresholds (dB) for CQI levels 1..15.
extern const std::array<double, 15> kCqiThresholdsDb;

int sinr_to_cqi(double sinr_db);

// Sum-of-sinusoids Rayleigh fading per user and RB on top of a fixed
// distance/shadowing link budget. Everything is a pure function of
// (config, seed, tti), so streams replay exactly.
class FadingChannel {
public:
    explicit FadingChannel(const ChannelConfig& config);

    const ChannelConfig& config() const { return cfg_; }
    int num_users() const { return cfg_.num_users; }
    int num_rbs() const { return cfg_.num_rbs; }

    double fading_gain_db(int user, int rb, long tti) const;
    double sinr_db(int user, int rb, long tti) const;
    CqiReport report(int user, long tti) const;
    std::vector<CqiReport> reports(long tti) const;
    std::vector<CqiReport> reports(const std::vector<int>& users, long tti) const;

private:
    ChannelConfig cfg_;
    double omega_d_ = 0.0;              // max Doppler, rad/s
    std::vector<double> mean_rx_dbm_;   // per-user link budget minus noise-free terms
    std::vector<double> cos_aoa_;       // [user][rb][path]
    std::vector<double> phase_i_;
    std::vector<double> phase_q_;

    std::size_t osc_index(int user, int rb, int path) const;
};

// Redundancy-ratio saturation tracker for the dataset collector.
struct CollectorState {
    double saturation = 0.0;
    double smoothing = 0.005;
    std::size_t unique_count = 0;
};

CollectorState update_saturation(const CollectorState& state, int reports_seen,
                                 int new_uniques);

struct CollectOptions {
    double stop_threshold = 0.99;
    double smoothing = 0.005;
    long max_ttis = 200000;
    std::size_t max_unique = 0; // 0 = no cap
};

struct CollectStats {
    long ttis_used = 0;
    double final_saturation = 0.0;
};

Dataset collect_dataset(const FadingChannel& channel, int m, const CollectOptions& options,
                        CollectStats* stats = nullptr);

std::map<int, Dataset> collect_datasets(const FadingChannel& channel,
                                        const std::vector<int>& m_values,
                                        const CollectOptions& options);

} // namespace scar
