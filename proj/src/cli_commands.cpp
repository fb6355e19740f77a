#include "scar/cli_commands.hpp"

#include "scar/clustering.hpp"
#include "scar/cqi_source.hpp"
#include "scar/preprocess.hpp"
#include "scar/rbfn.hpp"
#include "scar/rl_control.hpp"
#include "scar/scheduler_env.hpp"
#include "scar/state_compress.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace scar {

namespace {

namespace fs = std::filesystem;

ChannelConfig channel_from_config(const Config& cfg, std::uint64_t seed) {
    ChannelConfig c;
    c.num_rbs = cfg.get_int("rbs", c.num_rbs);
    c.num_users = cfg.get_int("users", c.num_users);
    c.speed_kmh = cfg.get_double("speed_kmh", c.speed_kmh);
    c.carrier_hz = cfg.get_double("carrier_hz", c.carrier_hz);
    c.num_paths = cfg.get_int("paths", c.num_paths);
    c.tx_power_dbm = cfg.get_double("tx_power_dbm", c.tx_power_dbm);
    c.noise_figure_db = cfg.get_double("noise_figure_db", c.noise_figure_db);
    c.penetration_loss_db = cfg.get_double("penetration_db", c.penetration_loss_db);
    c.shadowing_sigma_db = cfg.get_double("shadowing_db", c.shadowing_sigma_db);
    c.min_distance_km = cfg.get_double("min_distance_km", c.min_distance_km);
    c.max_distance_km = cfg.get_double("max_distance_km", c.max_distance_km);
    c.seed = seed;
    return c;
}

EnvConfig env_from_config(const Config& cfg, std::uint64_t seed) {
    EnvConfig e;
    e.channel = channel_from_config(cfg, seed);
    e.window = cfg.get_double("window", e.window);
    e.confidence = cfg.get_double("confidence", e.confidence);
    e.min_active = cfg.get_int("min_active", e.min_active);
    e.activity_period = cfg.get_int("activity_period", e.activity_period);
    return e;
}

ClusterConfig cluster_from_config(const Config& cfg) {
    ClusterConfig c;
    c.max_iters_per_run = cfg.get_int("max_iters_per_run", c.max_iters_per_run);
    c.total_iters = cfg.get_int("total_iters", c.total_iters);
    c.min_improvement = cfg.get_double("min_improvement", c.min_improvement);
    c.schedule.cooling_rate = cfg.get_double("cooling", c.schedule.cooling_rate);
    c.schedule.initial_acceptance = cfg.get_double("p0", c.schedule.initial_acceptance);
    c.schedule.sample_length = cfg.get_int("warmup", c.schedule.sample_length);
    c.tunneling.omega = cfg.get_double("omega", c.tunneling.omega);
    return c;
}

RbfnTrainConfig rbfn_train_from_config(const Config& cfg) {
    RbfnTrainConfig c;
    c.total_iters = cfg.get_long("train_iters", 20000);
    c.iters_per_run = cfg.get_int("iters_per_run", 200);
    c.schedule.cooling_rate = cfg.get_double("cooling", 0.99);
    c.schedule.initial_acceptance = cfg.get_double("p0", 0.8);
    c.schedule.sample_length = cfg.get_int("warmup", 2000);
    c.tunneling.omega = cfg.get_double("omega", 0.1);
    const std::string mode = cfg.get_string("train_mode", "sast");
    if (mode == "sast") c.mode = RbfnTrainMode::Sast;
    else if (mode == "plain") c.mode = RbfnTrainMode::Plain;
    else throw std::runtime_error("config: train_mode must be sast or plain");
    return c;
}

RlConfig rl_from_config(const Config& cfg) {
    RlConfig c;
    c.algorithm = algorithm_from_name(cfg.get_string("algorithm", "CACLA2"));
    c.hidden = cfg.get_int("hidden", c.hidden);
    c.discount = cfg.get_double("discount", c.discount);
    c.critic_lr = cfg.get_double("critic_lr", c.critic_lr);
    c.actor_lr = cfg.get_double("actor_lr", c.actor_lr);
    c.action_grid = cfg.get_int("action_grid", c.action_grid);
    c.eps_start = cfg.get_double("eps_start", c.eps_start);
    c.eps_end = cfg.get_double("eps_end", c.eps_end);
    c.sigma_start = cfg.get_double("sigma_start", c.sigma_start);
    c.sigma_end = cfg.get_double("sigma_end", c.sigma_end);
    c.train_ttis = cfg.get_long("train_ttis", c.train_ttis);
    c.eval_ttis = cfg.get_long("eval_ttis", c.eval_ttis);
    c.eval_runs = cfg.get_int("eval_runs", c.eval_runs);
    return c;
}

StateBuilder builder_from_config(const Config& cfg, const RbfnModel& model, int m) {
    StateBuilder b;
    b.model = model;
    b.m = m;
    const std::string mode = cfg.get_string("state_mode", "compressed");
    if (mode == "compressed") b.mode = StateMode::Compressed;
    else if (mode == "raw") b.mode = StateMode::RawHistograms;
    else throw std::runtime_error("config: state_mode must be compressed or raw");
    b.norm.k_count = static_cast<int>(model.centers.rows());
    b.norm.thr_max = cfg.get_double("thr_max", 12.0);
    b.norm.max_users = cfg.get_int("users", 20);
    return b;
}

bool power_of_two(int k) { return k >= 2 && (k & (k - 1)) == 0; }

std::vector<std::uint64_t> seeds_from_config(const Config& cfg, std::uint64_t seed) {
    if (!cfg.has("seeds")) return {seed};
    std::vector<std::uint64_t> out;
    for (const auto& s : cfg.get_string_list("seeds", "")) out.push_back(std::stoull(s));
    if (out.empty()) throw std::runtime_error("config: seeds list is empty");
    return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

} // namespace

void run_collect(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const FadingChannel channel(channel_from_config(cfg, seed));
    CollectOptions opts;
    opts.stop_threshold = cfg.get_double("stop_threshold", opts.stop_threshold);
    opts.smoothing = cfg.get_double("smoothing", opts.smoothing);
    opts.max_ttis = cfg.get_long("max_ttis", opts.max_ttis);
    opts.max_unique = static_cast<std::size_t>(cfg.get_long("max_unique", 0));
    for (int m : cfg.get_int_list("m_values", "3")) {
        CollectStats stats;
        const Dataset ds = collect_dataset(channel, m, opts, &stats);
        const std::string path = join_path(out_dir, "dataset_M" + std::to_string(m) + ".txt");
        save_dataset(path, ds);
        std::cout << "collect M=" << m << " unique=" << ds.points.rows()
                  << " ttis=" << stats.ttis_used << " saturation=" << stats.final_saturation
                  << " -> " << path << "\n";
    }
}

void run_cluster(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const ClusterConfig base = cluster_from_config(cfg);
    const std::vector<int> k_values = cfg.get_int_list("k_values", "64");
    const std::vector<std::uint64_t> seeds = seeds_from_config(cfg, seed);
    std::vector<ClusterMethod> methods;
    for (const auto& name : cfg.get_string_list("methods", "KN,RS,RSKN,SA,SAST"))
        methods.push_back(method_from_name(name));
    const ClusterMethod centers_method =
        method_from_name(cfg.get_string("centers_method", "SAST"));

    std::vector<BenchmarkRow> rows;
    for (const auto& path : cfg.get_string_list("datasets", "")) {
        const Dataset ds = load_dataset(path);
        for (ClusterMethod method : methods) {
            for (int k : k_values) {
                Matrix best_centers;
                double best_d = 0.0;
                bool have_best = false;
                for (std::uint64_t s : seeds) {
                    ClusterConfig run_cfg = base;
                    run_cfg.method = method;
                    Rng rng(s);
                    const auto t0 = std::chrono::steady_clock::now();
                    const ClusterResult r = cluster(ds.points, k, run_cfg, rng);
                    const auto t1 = std::chrono::steady_clock::now();
                    BenchmarkRow row;
                    row.method = method;
                    row.m = ds.m;
                    row.k = k;
                    row.seed = s;
                    row.distortion = r.distortion;
                    row.cpu_seconds = std::chrono::duration<double>(t1 - t0).count();
                    rows.push_back(row);
                    if (method == centers_method && (!have_best || r.distortion < best_d)) {
                        best_centers = r.centers;
                        best_d = r.distortion;
                        have_best = true;
                    }
                }
                if (have_best) {
                    CenterSet set;
                    set.centers = order_centers(best_centers);
                    set.m = ds.m;
                    const std::string path_out =
                        join_path(out_dir, "centers_M" + std::to_string(ds.m) + "_K" +
                                               std::to_string(k) + ".txt");
                    save_centers(path_out, set);
                    std::cout << "cluster M=" << ds.m << " K=" << k
                              << " method=" << method_name(centers_method)
                              << " distortion=" << best_d << " -> " << path_out << "\n";
                }
            }
        }
    }
    if (rows.empty()) throw std::runtime_error("cluster: no datasets given");
    save_benchmark_csv(join_path(out_dir, "benchmark.csv"), rows);
}

namespace {

struct RbfnInputs {
    Dataset dataset;
    CenterSet centers;
    std::vector<LabeledSample> labeled;
    std::vector<LabeledSample> validation;
};

RbfnInputs rbfn_inputs(const Config& cfg) {
    RbfnInputs in;
    in.dataset = load_dataset(cfg.get_string("dataset"));
    in.centers = load_centers(cfg.get_string("centers"));
    if (in.centers.centers.cols() != in.dataset.points.cols())
        throw std::runtime_error("train-rbfn: dataset and centers disagree on N");
    const int k = static_cast<int>(in.centers.centers.rows());
    if (!power_of_two(k))
        throw std::runtime_error("train-rbfn: K must be a power of two");
    in.labeled = label_by_nearest(in.dataset.points, in.centers.centers);
    for (std::size_t i = 0; i < in.labeled.size(); i += 5)
        in.validation.push_back(in.labeled[i]);
    return in;
}

} // namespace

void run_train_rbfn(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    RbfnInputs in = rbfn_inputs(cfg);
    const RbfnTrainConfig train_cfg = rbfn_train_from_config(cfg);
    const double sigma = cfg.get_double("sigma", 0.15);
    const double eta = cfg.get_double("eta", 0.1);

    Rng rng(seed);
    Rng stream_rng = rng.split();
    const RbfnModel init = make_rbfn(in.centers.centers, sigma, eta, rng);
    const SampleStream stream = [&]() {
        return in.labeled[stream_rng.uniform_below(in.labeled.size())];
    };
    const RbfnTrainResult result = sast_train(init, in.labeled, stream, train_cfg, rng);

    const int k = static_cast<int>(in.centers.centers.rows());
    const std::string path = join_path(out_dir, "rbfn_M" + std::to_string(in.dataset.m) +
                                                    "_K" + std::to_string(k) + ".txt");
    save_rbfn(path, result.model, in.dataset.m);
    std::cout << "train-rbfn M=" << in.dataset.m << " K=" << k
              << " best_error=" << result.best_error
              << " val_error=" << mean_error(result.model, in.validation)
              << " val_accuracy=" << classification_accuracy(result.model, in.validation)
              << " -> " << path << "\n";
}

void run_sweep(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    RbfnInputs in = rbfn_inputs(cfg);
    RbfnTrainConfig train_cfg = rbfn_train_from_config(cfg);
    if (!cfg.has("train_iters")) train_cfg.total_iters = 5000;
    const std::vector<double> sigmas =
        cfg.get_double_list("sigmas", "0.05,0.1,0.15,0.25,0.4");
    const std::vector<double> etas = cfg.get_double_list("etas", "0.02,0.05,0.1,0.2");
    const auto rows = hyperparameter_sweep(in.centers.centers, in.dataset.m, in.labeled,
                                           in.validation, sigmas, etas, train_cfg, seed);
    save_sweep_csv(join_path(out_dir, "sweep.csv"), rows);
    const auto best = std::min_element(rows.begin(), rows.end(),
                                       [](const SweepRow& a, const SweepRow& b) {
                                           return a.final_error < b.final_error;
                                       });
    std::cout << "sweep best sigma=" << best->sigma << " eta=" << best->eta
              << " final_error=" << best->final_error << "\n";
}

void run_train_rl(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    int m = 0;
    const RbfnModel model = load_rbfn(cfg.get_string("model"), &m);
    const StateBuilder builder = builder_from_config(cfg, model, m);
    const RlConfig rl_cfg = rl_from_config(cfg);
    SchedulerEnv env(env_from_config(cfg, seed), seed);
    Rng rng(seed);
    const TrainResult result = train_controller(env, builder, rl_cfg, rng);

    const std::string suffix =
        builder.mode == StateMode::RawHistograms ? "_RAW" : "";
    const std::string path = join_path(
        out_dir, "policy_" + algorithm_name(rl_cfg.algorithm) + suffix + ".txt");
    save_policy(path, result.policy, rl_cfg);
    save_trace_csv(join_path(out_dir, "train_trace.csv"), result.log);
    const RegionShares s = result.log.shares();
    std::cout << "train-rl algorithm=" << algorithm_name(rl_cfg.algorithm) << suffix
              << " p_uf=" << s.p_uf << " p_fa=" << s.p_fa << " p_of=" << s.p_of
              << " -> " << path << "\n";
}

void run_evaluate(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    int m = 0;
    const RbfnModel model = load_rbfn(cfg.get_string("model"), &m);
    const RlConfig rl_cfg = rl_from_config(cfg);
    const int k = static_cast<int>(model.centers.rows());

    std::vector<EvalRow> rows;
    bool traced = false;

    auto eval_policy_file = [&](const std::string& path, const std::string& label,
                                StateMode mode) {
        const Policy policy = load_policy(path);
        Config builder_cfg = cfg;
        builder_cfg.set("state_mode", mode == StateMode::RawHistograms ? "raw" : "compressed");
        const StateBuilder builder = builder_from_config(builder_cfg, model, m);
        if (builder.dim() != policy.state_dim)
            throw std::runtime_error("evaluate: policy state size does not match " + label);
        for (int run = 0; run < rl_cfg.eval_runs; ++run) {
            const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(run);
            SchedulerEnv env(env_from_config(cfg, run_seed), run_seed);
            const EpisodeLog log = evaluate_policy(env, builder, policy, rl_cfg.eval_ttis);
            if (!traced) {
                save_trace_csv(join_path(out_dir, "eval_trace.csv"), log);
                traced = true;
            }
            rows.push_back({label, m, k, run_seed, log.shares()});
        }
    };

    if (cfg.has("policy")) {
        const Policy p = load_policy(cfg.get_string("policy"));
        const std::string name =
            cfg.get_string("policy_label", algorithm_name(p.algorithm));
        const StateMode mode = cfg.get_string("state_mode", "compressed") == "raw"
                                   ? StateMode::RawHistograms
                                   : StateMode::Compressed;
        eval_policy_file(cfg.get_string("policy"), name, mode);
    }
    if (cfg.has("ablation_policy")) {
        const Policy p = load_policy(cfg.get_string("ablation_policy"));
        const std::string name =
            cfg.get_string("ablation_label", algorithm_name(p.algorithm) + "_RAW");
        eval_policy_file(cfg.get_string("ablation_policy"), name, StateMode::RawHistograms);
    }
    for (const auto& b : cfg.get_string_list("baselines", "PF")) {
        const Baseline baseline = b == "PF" ? Baseline::PF : Baseline::MT;
        if (b != "PF" && b != "MT")
            throw std::runtime_error("evaluate: unknown baseline " + b);
        for (int run = 0; run < rl_cfg.eval_runs; ++run) {
            const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(run);
            SchedulerEnv env(env_from_config(cfg, run_seed), run_seed);
            const EpisodeLog log = run_baseline(env, baseline, rl_cfg.eval_ttis);
            rows.push_back({b, m, k, run_seed, log.shares()});
        }
    }
    if (rows.empty()) throw std::runtime_error("evaluate: nothing to evaluate");
    save_eval_csv(join_path(out_dir, "evaluation.csv"), rows);
    for (const auto& r : rows)
        std::cout << "evaluate " << r.algorithm << " seed=" << r.seed
                  << " p_uf=" << r.shares.p_uf << " p_fa=" << r.shares.p_fa
                  << " p_of=" << r.shares.p_of << "\n";
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

} // namespace

void run_report(const Config& cfg, std::uint64_t, const std::string& out_dir) {
    (void)cfg;
    std::ostringstream report;
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };

    const auto benchmark = read_csv(join_path(out_dir, "benchmark.csv"));
    if (benchmark.size() > 1) {
        report << "clustering benchmark\n";
        std::map<std::string, std::pair<double, int>> agg;
        for (std::size_t i = 1; i < benchmark.size(); ++i) {
            const auto& r = benchmark[i];
            if (r.size() < 6) continue;
            const std::string key = r[0] + " M=" + r[1] + " K=" + r[2];
            agg[key].first += std::stod(r[4]);
            agg[key].second += 1;
        }
        for (const auto& [key, v] : agg)
            report << "  " << key << " mean_distortion=" << fmt(v.first / v.second)
                   << " runs=" << v.second << "\n";
    }

    const auto sweep = read_csv(join_path(out_dir, "sweep.csv"));
    if (sweep.size() > 1) {
        report << "hyperparameter sweep\n";
        std::size_t best = 1;
        for (std::size_t i = 2; i < sweep.size(); ++i)
            if (std::stod(sweep[i][5]) < std::stod(sweep[best][5])) best = i;
        report << "  best sigma=" << sweep[best][2] << " eta=" << sweep[best][3]
               << " final_error=" << fmt(std::stod(sweep[best][5])) << "\n";
    }

    const auto eval = read_csv(join_path(out_dir, "evaluation.csv"));
    if (eval.size() > 1) {
        report << "evaluation\n";
        std::map<std::string, std::array<double, 5>> agg;
        for (std::size_t i = 1; i < eval.size(); ++i) {
            const auto& r = eval[i];
            if (r.size() < 8) continue;
            auto& a = agg[r[0] + " M=" + r[1] + " K=" + r[2]];
            a[0] += std::stod(r[4]);
            a[1] += std::stod(r[5]);
            a[2] += std::stod(r[6]);
            a[3] += std::stod(r[7]);
            a[4] += 1.0;
        }
        for (const auto& [key, a] : agg)
            report << "  " << key << " p_uf=" << fmt(a[0] / a[4]) << " p_fa=" << fmt(a[1] / a[4])
                   << " p_of=" << fmt(a[2] / a[4]) << " cell=" << fmt(a[3] / a[4])
                   << " runs=" << static_cast<int>(a[4]) << "\n";
    }

    if (report.str().empty())
        throw std::runtime_error("report: no CSV outputs found in " + out_dir);
    std::ofstream out(join_path(out_dir, "summary.txt"));
    if (!out) throw std::runtime_error("report: cannot write summary");
    out << report.str();
    std::cout << report.str();
}

} // namespace scar
