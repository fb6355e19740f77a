#include "scar/scheduler_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace scar {

namespace {
const double kEfficiency[15] = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
                                3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
constexpr double kMinAverageMbps = 1e-6;
constexpr double kGridStep = 0.01;
} // namespace

double cqi_efficiency(int cqi) {
    if (cqi < 1 || cqi > 15) throw std::out_of_range("cqi_efficiency: CQI outside [1, 15]");
    return kEfficiency[cqi - 1];
}

int cqi_bits_per_rb(int cqi) {
    return static_cast<int>(std::lround(168.0 * cqi_efficiency(cqi)));
}

double cqi_rate_bps(int cqi) {
    return static_cast<double>(cqi_bits_per_rb(cqi)) / 1e-3;
}

Allocation gpf_allocate(const std::vector<CqiReport>& reports,
                        std::span<const double> throughputs, const FairnessParams& params) {
    if (reports.size() != throughputs.size())
        throw std::invalid_argument("gpf_allocate: report/throughput size mismatch");
    Allocation alloc;
    if (reports.empty()) return alloc;
    const std::size_t rbs = reports[0].values.size();
    for (const auto& r : reports)
        if (r.values.size() != rbs)
            throw std::invalid_argument("gpf_allocate: ragged reports");

    std::vector<double> floored(throughputs.size());
    for (std::size_t i = 0; i < throughputs.size(); ++i)
        floored[i] = std::max(throughputs[i], kMinAverageMbps);

    alloc.rb_to_user.assign(rbs, -1);
    for (std::size_t j = 0; j < rbs; ++j) {
        int best = -1;
        double best_metric = 0.0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const double rate = cqi_rate_bps(reports[i].values[j]) / 1e6; // Mbps
            const double metric =
                std::pow(rate, params.beta) / std::pow(floored[i], params.alpha);
            if (best < 0 || metric > best_metric) {
                best = static_cast<int>(i);
                best_metric = metric;
            }
        }
        alloc.rb_to_user[j] = best;
    }
    return alloc;
}

void update_throughputs(std::span<double> throughputs, const std::vector<CqiReport>& reports,
                        const Allocation& allocation, double window) {
    if (window < 1.0)
        throw std::invalid_argument("update_throughputs: window must be >= 1");
    if (reports.size() != throughputs.size())
        throw std::invalid_argument("update_throughputs: size mismatch");
    std::vector<double> served(throughputs.size(), 0.0); // Mbps this TTI
    for (std::size_t j = 0; j < allocation.rb_to_user.size(); ++j) {
        const int u = allocation.rb_to_user[j];
        if (u < 0) continue;
        if (u >= static_cast<int>(reports.size()))
            throw std::out_of_range("update_throughputs: allocation outside population");
        served[u] += cqi_bits_per_rb(reports[u].values[j]) / 1000.0;
    }
    const double keep = 1.0 - 1.0 / window;
    for (std::size_t i = 0; i < throughputs.size(); ++i)
        throughputs[i] = keep * throughputs[i] + served[i] / window;
}

std::string region_name(Region region) {
    switch (region) {
    case Region::UF: return "UF";
    case Region::FA: return "FA";
    case Region::OF: return "OF";
    }
    throw std::invalid_argument("region_name: unknown region");
}

Region region_from_name(const std::string& name) {
    if (name == "UF") return Region::UF;
    if (name == "FA") return Region::FA;
    if (name == "OF") return Region::OF;
    throw std::invalid_argument("region_from_name: unknown region " + name);
}

RegionCheck fairness_region(std::span<const double> throughputs, double confidence) {
    if (throughputs.empty())
        throw std::invalid_argument("fairness_region: empty population");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw std::invalid_argument("fairness_region: confidence outside (0, 1)");
    const double n = static_cast<double>(throughputs.size());
    double mean = 0.0;
    for (double t : throughputs) {
        if (t < 0.0) throw std::invalid_argument("fairness_region: negative throughput");
        mean += t;
    }
    mean /= n;

    RegionCheck check;
    if (mean <= 0.0) {
        check.region = Region::UF;
        check.max_upper_violation = 1.0;
        return check;
    }

    bool under = false;
    bool over = true;
    for (int g = 1; g <= 100; ++g) {
        const double x = g * kGridStep;
        int below = 0;
        for (double t : throughputs)
            if (t / mean < x) ++below;
        const double cdf = below / n;

        const double upper = cdf - x;
        if (upper > check.max_upper_violation) check.max_upper_violation = upper;
        if (upper > 1e-9) under = true;

        if (x > confidence) {
            const double deficit = (x - confidence) - cdf;
            if (deficit > check.max_lower_deficit) check.max_lower_deficit = deficit;
            if (cdf >= x - confidence) over = false;
        }
    }
    if (check.max_upper_violation < 0.0) check.max_upper_violation = 0.0;
    if (check.max_lower_deficit < 0.0) check.max_lower_deficit = 0.0;
    check.region = under ? Region::UF : (over ? Region::OF : Region::FA);
    return check;
}

double jain_index(std::span<const double> throughputs) {
    if (throughputs.empty()) throw std::invalid_argument("jain_index: empty population");
    double sum = 0.0;
    double sumsq = 0.0;
    for (double t : throughputs) {
        sum += t;
        sumsq += t * t;
    }
    if (sumsq <= 0.0) throw std::invalid_argument("jain_index: all-zero population");
    return sum * sum / (static_cast<double>(throughputs.size()) * sumsq);
}

RegionShares EpisodeLog::shares() const {
    RegionShares s;
    if (rows.empty()) return s;
    double cell = 0.0;
    for (const auto& r : rows) {
        switch (r.region) {
        case Region::UF: s.p_uf += 1.0; break;
        case Region::FA: s.p_fa += 1.0; break;
        case Region::OF: s.p_of += 1.0; break;
        }
        cell += r.cell_throughput;
    }
    const double n = static_cast<double>(rows.size());
    s.p_uf *= 100.0 / n;
    s.p_fa *= 100.0 / n;
    s.p_of *= 100.0 / n;
    s.mean_cell_throughput = cell / n;
    return s;
}

void save_trace_csv(const std::string& path, const EpisodeLog& log) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace_csv: cannot open " + path);
    out << "tti,alpha,beta,region,jfi,mean_thr,std_thr,cell_throughput\n";
    char buf[64];
    for (const auto& r : log.rows) {
        out << r.tti << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.alpha);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.beta);
        out << buf << ',' << region_name(r.region) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.jain);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.mean_thr);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.std_thr);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.cell_throughput);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("save_trace_csv: write failed for " + path);
}

SchedulerEnv::SchedulerEnv(const EnvConfig& config, std::uint64_t seed)
    : cfg_(config), channel_([&] {
          ChannelConfig c = config.channel;
          c.seed = seed;
          return c;
      }()),
      rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
    if (cfg_.min_active < 1 || cfg_.min_active > cfg_.channel.num_users)
        throw std::invalid_argument("SchedulerEnv: bad active-user bounds");
    if (cfg_.activity_period < 1)
        throw std::invalid_argument("SchedulerEnv: activity period must be >= 1");
    gamma_.assign(cfg_.channel.num_users, 0.0);
    active_.assign(cfg_.channel.num_users, true);
    redraw_activity();
    // Prime the averages with each user's equal-share rate at the first
    // report. Starting everyone from zero parks the cell in a degenerate
    // all-equal state for roughly an activity period, which distorts any
    // short episode's region statistics.
    int active_count = 0;
    for (bool a : active_)
        if (a) ++active_count;
    std::vector<int> everyone(static_cast<std::size_t>(cfg_.channel.num_users));
    for (int u = 0; u < cfg_.channel.num_users; ++u) everyone[u] = u;
    const auto first = channel_.reports(everyone, 0);
    for (int u = 0; u < cfg_.channel.num_users; ++u) {
        double own_all = 0.0;
        for (int v : first[u].values) own_all += cqi_bits_per_rb(v) / 1000.0;
        gamma_[u] = own_all / static_cast<double>(active_count);
    }
}

void SchedulerEnv::redraw_activity() {
    const int total = cfg_.channel.num_users;
    const int target =
        cfg_.min_active + static_cast<int>(rng_.uniform_below(total - cfg_.min_active + 1));
    int count = 0;
    for (bool a : active_)
        if (a) ++count;
    while (count < target) {
        std::vector<int> inactive;
        for (int u = 0; u < total; ++u)
            if (!active_[u]) inactive.push_back(u);
        active_[inactive[rng_.uniform_below(inactive.size())]] = true;
        ++count;
    }
    while (count > target) {
        std::vector<int> act;
        for (int u = 0; u < total; ++u)
            if (active_[u]) act.push_back(u);
        active_[act[rng_.uniform_below(act.size())]] = false;
        --count;
    }
}

const SchedulerEnv::Observation& SchedulerEnv::observe() {
    if (observed_) return cached_;
    cached_.tti = tti_;
    cached_.active_users.clear();
    cached_.throughputs.clear();
    for (int u = 0; u < cfg_.channel.num_users; ++u)
        if (active_[u]) {
            cached_.active_users.push_back(u);
            cached_.throughputs.push_back(gamma_[u]);
        }
    cached_.reports = channel_.reports(cached_.active_users, tti_);
    observed_ = true;
    return cached_;
}

SchedulerEnv::Outcome SchedulerEnv::apply(const FairnessParams& params) {
    const Observation& obs = observe();
    const Allocation alloc = gpf_allocate(obs.reports, obs.throughputs, params);

    std::vector<double> thr = obs.throughputs;
    update_throughputs(thr, obs.reports, alloc, cfg_.window);

    Outcome out;
    double cell_bits = 0.0;
    for (std::size_t j = 0; j < alloc.rb_to_user.size(); ++j) {
        const int u = alloc.rb_to_user[j];
        if (u >= 0) cell_bits += cqi_bits_per_rb(obs.reports[u].values[j]);
    }
    out.cell_throughput = cell_bits / 1000.0; // Mbps

    for (std::size_t i = 0; i < obs.active_users.size(); ++i)
        gamma_[obs.active_users[i]] = thr[i];

    out.region = fairness_region(thr, cfg_.confidence);
    bool any = false;
    for (double t : thr)
        if (t > 0.0) { any = true; break; }
    out.jain = any ? jain_index(thr) : 0.0;
    double mean = 0.0;
    for (double t : thr) mean += t;
    mean /= static_cast<double>(thr.size());
    double var = 0.0;
    for (double t : thr) var += (t - mean) * (t - mean);
    var /= static_cast<double>(thr.size());
    out.mean_thr = mean;
    out.std_thr = std::sqrt(var);

    ++tti_;
    observed_ = false;
    if (tti_ % cfg_.activity_period == 0) redraw_activity();
    return out;
}

EpisodeLog run_baseline(SchedulerEnv& env, Baseline baseline, long ttis) {
    if (ttis < 1) throw std::invalid_argument("run_baseline: no TTIs");
    EpisodeLog log;
    log.rows.reserve(static_cast<std::size_t>(ttis));
    FairnessParams params{1.0, 1.0};
    for (long t = 0; t < ttis; ++t) {
        const auto& obs = env.observe();
        const long tti = obs.tti;
        const auto out = env.apply(params);
        TtiRow row;
        row.tti = tti;
        row.alpha = params.alpha;
        row.beta = params.beta;
        row.region = out.region.region;
        row.jain = out.jain;
        row.mean_thr = out.mean_thr;
        row.std_thr = out.std_thr;
        row.cell_throughput = out.cell_throughput;
        log.rows.push_back(row);
        if (baseline == Baseline::MT) {
            params.alpha += 0.05 * (0.9 - out.jain);
            params.alpha = std::clamp(params.alpha, 0.0, 1.0);
        }
    }
    return log;
}

} // namespace scar
