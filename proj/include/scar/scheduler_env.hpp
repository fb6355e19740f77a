#pragma once

#include "scar/cqi_source.hpp"
#include "scar/preprocess.hpp"
#include "scar/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace scar {

// 168 data resource elements per RB per TTI times the per-CQI spectral
// efficiency, rounded to whole bits.
double cqi_efficiency(int cqi);
int cqi_bits_per_rb(int cqi);
double cqi_rate_bps(int cqi);

struct FairnessParams {
    double alpha = 1.0;
    double beta = 1.0;
};

struct Allocation {
    std::vector<int> rb_to_user; // index into the scheduled population, -1 = idle
};

// Generalized proportional fair metric rate^beta / average^alpha per RB;
// ties go to the lowest user index. Averages are floored at 1e-6 Mbps.
Allocation gpf_allocate(const std::vector<CqiReport>& reports,
                        std::span<const double> throughputs, const FairnessParams& params);

// exponential moving average over `window` TTIs; unscheduled users decay
void update_throughputs(std::span<double> throughputs, const std::vector<CqiReport>& reports,
                        const Allocation& allocation, double window);

enum class Region { UF, FA, OF };
std::string region_name(Region region);
Region region_from_name(const std::string& name);

struct RegionCheck {
    Region region = Region::FA;
    double max_upper_violation = 0.0; // depth above the fairness bound
    double max_lower_deficit = 0.0;   // depth below the shifted bound
};

// Normalized-throughput CDF against the fairness bound on a 100-point grid,
// strict convention F(x) = #{x_i < x} / n.
RegionCheck fairness_region(std::span<const double> throughputs, double confidence = 0.05);

double jain_index(std::span<const double> throughputs);

struct EnvConfig {
    ChannelConfig channel;
    double window = 100.0;
    double confidence = 0.05;
    int min_active = 5;
    int activity_period = 500; // TTIs between active-set redraws
};

struct TtiRow {
    long tti = 0;
    double alpha = 1.0;
    double beta = 1.0;
    Region region = Region::FA;
    double jain = 0.0;
    double mean_thr = 0.0;
    double std_thr = 0.0;
    double cell_throughput = 0.0;
    double reward = 0.0;
};

struct RegionShares {
    double p_uf = 0.0; // percent
    double p_fa = 0.0;
    double p_of = 0.0;
    double mean_cell_throughput = 0.0;
};

struct EpisodeLog {
    std::vector<TtiRow> rows;
    RegionShares shares() const;
};

void save_trace_csv(const std::string& path, const EpisodeLog& log);

// One cell: fading channel, per-user throughput averages, and an active-user
// set that is redrawn on a fixed period. observe() exposes the TTI's reports
// before allocation; apply() schedules, updates averages, and advances time.
class SchedulerEnv {
public:
    explicit SchedulerEnv(const EnvConfig& config, std::uint64_t seed);

    struct Observation {
        long tti = 0;
        std::vector<int> active_users;
        std::vector<CqiReport> reports;   // aligned with active_users
        std::vector<double> throughputs;  // aligned with active_users
    };

    struct Outcome {
        RegionCheck region;
        double jain = 0.0;
        double mean_thr = 0.0;
        double std_thr = 0.0;
        double cell_throughput = 0.0;
    };

    const EnvConfig& config() const { return cfg_; }
    long tti() const { return tti_; }

    const Observation& observe();
    Outcome apply(const FairnessParams& params);

private:
    EnvConfig cfg_;
    FadingChannel channel_;
    Rng rng_;
    std::vector<double> gamma_;
    std::vector<bool> active_;
    long tti_ = 0;
    bool observed_ = false;
    Observation cached_;

    void redraw_activity();
};

enum class Baseline { PF, MT };

EpisodeLog run_baseline(SchedulerEnv& env, Baseline baseline, long ttis);

} // namespace scar
