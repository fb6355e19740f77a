#include "scar/cqi_source.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace scar {

const std::array<double, 15> kCqiThresholdsDb = {
    -6.5, -4.6, -2.7, -0.8, 1.1, 3.0, 4.9, 6.8, 8.7, 10.6, 12.5, 14.4, 16.3, 18.2, 20.1};

int sinr_to_cqi(double sinr_db) {
    int level = 0;
    for (double thr : kCqiThresholdsDb) {
        if (sinr_db >= thr) ++level;
        else break;
    }
    return level < 1 ? 1 : level;
}

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kTtiSeconds = 1e-3;

double pathloss_db(double d_km) {
    return 128.1 + 37.6 * std::log10(d_km);
}
} // namespace

FadingChannel::FadingChannel(const ChannelConfig& config) : cfg_(config) {
    if (cfg_.num_users < 1 || cfg_.num_rbs < 1 || cfg_.num_paths < 1)
        throw std::invalid_argument("FadingChannel: empty configuration");
    if (cfg_.cqi_levels != 15)
        throw std::invalid_argument("FadingChannel: CQI table is defined for 15 levels");

    const double speed_ms = cfg_.speed_kmh / 3.6;
    omega_d_ = kTwoPi * speed_ms * cfg_.carrier_hz / 299792458.0;

    Rng rng(cfg_.seed);

    const double tx_rb_dbm =
        cfg_.tx_power_dbm - 10.0 * std::log10(static_cast<double>(cfg_.num_rbs));
    const double noise_dbm =
        -174.0 + 10.0 * std::log10(180e3) + cfg_.noise_figure_db;

    mean_rx_dbm_.resize(cfg_.num_users);
    for (int u = 0; u < cfg_.num_users; ++u) {
        const double d = rng.uniform(cfg_.min_distance_km, cfg_.max_distance_km);
        const double shadow = rng.normal() * cfg_.shadowing_sigma_db;
        mean_rx_dbm_[u] = tx_rb_dbm - pathloss_db(d) - shadow -
                          cfg_.penetration_loss_db - noise_dbm;
    }

    const std::size_t n =
        static_cast<std::size_t>(cfg_.num_users) * cfg_.num_rbs * cfg_.num_paths;
    cos_aoa_.resize(n);
    phase_i_.resize(n);
    phase_q_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cos_aoa_[i] = std::cos(rng.uniform(0.0, kTwoPi));
        phase_i_[i] = rng.uniform(0.0, kTwoPi);
        phase_q_[i] = rng.uniform(0.0, kTwoPi);
    }
}

std::size_t FadingChannel::osc_index(int user, int rb, int path) const {
    return (static_cast<std::size_t>(user) * cfg_.num_rbs + rb) * cfg_.num_paths + path;
}

double FadingChannel::fading_gain_db(int user, int rb, long tti) const {
    const double t = static_cast<double>(tti) * kTtiSeconds;
    double h_i = 0.0;
    double h_q = 0.0;
    for (int p = 0; p < cfg_.num_paths; ++p) {
        const std::size_t i = osc_index(user, rb, p);
        const double arg = omega_d_ * t * cos_aoa_[i];
        h_i += std::cos(arg + phase_i_[i]);
        h_q += std::sin(arg + phase_q_[i]);
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(cfg_.num_paths));
    h_i *= scale;
    h_q *= scale;
    const double power = (h_i * h_i + h_q * h_q) / 2.0;
    return 10.0 * std::log10(power > 1e-300 ? power : 1e-300);
}

double FadingChannel::sinr_db(int user, int rb, long tti) const {
    return mean_rx_dbm_[user] + fading_gain_db(user, rb, tti);
}

CqiReport FadingChannel::report(int user, long tti) const {
    if (user < 0 || user >= cfg_.num_users)
        throw std::out_of_range("FadingChannel::report: bad user index");
    CqiReport r;
    r.user_id = user;
    r.tti = tti;
    r.values.resize(cfg_.num_rbs);
    for (int j = 0; j < cfg_.num_rbs; ++j)
        r.values[j] = sinr_to_cqi(sinr_db(user, j, tti));
    return r;
}

std::vector<CqiReport> FadingChannel::reports(long tti) const {
    std::vector<CqiReport> out;
    out.reserve(cfg_.num_users);
    for (int u = 0; u < cfg_.num_users; ++u) out.push_back(report(u, tti));
    return out;
}

std::vector<CqiReport> FadingChannel::reports(const std::vector<int>& users, long tti) const {
    std::vector<CqiReport> out;
    out.reserve(users.size());
    for (int u : users) out.push_back(report(u, tti));
    return out;
}

CollectorState update_saturation(const CollectorState& state, int reports_seen,
                                 int new_uniques) {
    if (reports_seen <= 0)
        throw std::invalid_argument("update_saturation: no reports");
    if (new_uniques < 0 || new_uniques > reports_seen)
        throw std::invalid_argument("update_saturation: bad unique count");
    const double redundancy =
        static_cast<double>(reports_seen - new_uniques) / static_cast<double>(reports_seen);
    CollectorState next = state;
    next.saturation = (1.0 - state.smoothing) * state.saturation + state.smoothing * redundancy;
    next.unique_count = state.unique_count + static_cast<std::size_t>(new_uniques);
    return next;
}

namespace {

struct Accumulator {
    CollectorState state;
    std::set<std::vector<double>> seen;
    std::vector<Vector> rows;
    bool done = false;
};

} // namespace

std::map<int, Dataset> collect_datasets(const FadingChannel& channel,
                                        const std::vector<int>& m_values,
                                        const CollectOptions& options) {
    if (m_values.empty())
        throw std::invalid_argument("collect_datasets: no reduction levels");
    // The channel replays exactly per TTI, so each level sees the same stream
    // and can stop independently.
    std::map<int, Dataset> out;
    for (int m : m_values) out.emplace(m, collect_dataset(channel, m, options));
    return out;
}

Dataset collect_dataset(const FadingChannel& channel, int m, const CollectOptions& options,
                        CollectStats* stats) {
    const int n = channel.config().cqi_levels;
    if (m < 1 || m > n)
        throw std::invalid_argument("collect_dataset: M outside [1, N]");

    Accumulator a;
    a.state.smoothing = options.smoothing;
    long tti = 0;
    for (; tti < options.max_ttis && !a.done; ++tti) {
        const auto batch = channel.reports(tti);
        int new_uniques = 0;
        for (const auto& r : batch) {
            const TopMVector t = top_m_reduce(histogram(r, n), m);
            std::vector<double> key(t.bins.data(), t.bins.data() + t.bins.size());
            if (a.seen.insert(std::move(key)).second) {
                a.rows.push_back(t.bins);
                ++new_uniques;
            }
        }
        a.state = update_saturation(a.state, static_cast<int>(batch.size()), new_uniques);
        const bool capped = options.max_unique > 0 && a.state.unique_count >= options.max_unique;
        if (a.state.saturation > options.stop_threshold || capped) a.done = true;
    }
    if (!a.done)
        throw std::runtime_error("collect_dataset: saturation not reached within TTI budget");
    if (stats) {
        stats->ttis_used = tti;
        stats->final_saturation = a.state.saturation;
    }

    Dataset ds;
    ds.n_levels = n;
    ds.m = m;
    std::size_t rows = a.rows.size();
    if (options.max_unique > 0 && rows > options.max_unique) rows = options.max_unique;
    ds.points.resize(static_cast<Eigen::Index>(rows), n);
    for (std::size_t i = 0; i < rows; ++i)
        ds.points.row(static_cast<Eigen::Index>(i)) = a.rows[i].transpose();
    return ds;
}

} // namespace scar
