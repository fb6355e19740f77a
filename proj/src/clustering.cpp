#include "scar/clustering.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace scar {

std::string method_name(ClusterMethod method) {
    switch (method) {
    case ClusterMethod::KN: return "KN";
    case ClusterMethod::RS: return "RS";
    case ClusterMethod::RSKN: return "RSKN";
    case ClusterMethod::SA: return "SA";
    case ClusterMethod::SAST: return "SAST";
    }
    throw std::invalid_argument("method_name: unknown method");
}

ClusterMethod method_from_name(const std::string& name) {
    if (name == "KN") return ClusterMethod::KN;
    if (name == "RS") return ClusterMethod::RS;
    if (name == "RSKN") return ClusterMethod::RSKN;
    if (name == "SA") return ClusterMethod::SA;
    if (name == "SAST") return ClusterMethod::SAST;
    throw std::invalid_argument("method_from_name: unknown method " + name);
}

double distortion(const Matrix& points, const Matrix& centers) {
    if (points.rows() < 1 || centers.rows() < 1)
        throw std::invalid_argument("distortion: empty input");
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double best = (points.row(i) - centers.row(0)).squaredNorm();
        for (Eigen::Index k = 1; k < centers.rows(); ++k) {
            const double d = (points.row(i) - centers.row(k)).squaredNorm();
            if (d < best) best = d;
        }
        total += best;
    }
    return total;
}

double distortion(const KnTree& tree, const Matrix& centers) {
    return tree.filter_assign(centers).distortion;
}

namespace {

std::vector<int> unique_row_indices(const Matrix& points) {
    std::map<std::vector<double>, int> first;
    std::vector<int> order;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        std::vector<double> key(points.cols());
        for (Eigen::Index c = 0; c < points.cols(); ++c) key[c] = points(i, c);
        if (first.emplace(std::move(key), static_cast<int>(i)).second)
            order.push_back(static_cast<int>(i));
    }
    return order;
}

bool row_in(const Matrix& centers, const Eigen::RowVectorXd& row) {
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
        if ((centers.row(k).array() == row.array()).all()) return true;
    return false;
}

// replace one uniformly chosen center with a dataset row not already a center
void swap_one_center(Matrix& centers, const Matrix& points, Rng& rng) {
    const Eigen::Index target = static_cast<Eigen::Index>(rng.uniform_below(centers.rows()));
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.uniform_below(points.rows()));
        if (!row_in(centers, points.row(i))) {
            centers.row(target) = points.row(i);
            return;
        }
    }
    centers.row(target) = points.row(rng.uniform_below(points.rows()));
}

} // namespace

Matrix random_centers(const Matrix& points, int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("random_centers: k must be >= 1");
    std::vector<int> unique = unique_row_indices(points);
    if (static_cast<std::size_t>(k) > unique.size())
        throw std::invalid_argument("random_centers: k exceeds distinct points");
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_below(unique.size() - i);
        std::swap(unique[i], unique[j]);
    }
    Matrix centers(k, points.cols());
    for (int i = 0; i < k; ++i) centers.row(i) = points.row(unique[i]);
    return centers;
}

Matrix lloyd_iteration(const KnTree& tree, const Matrix& centers) {
    const Matrix& points = tree.points();
    const auto a = tree.filter_assign(centers);
    Matrix next = centers;
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
        if (a.counts[k] > 0)
            next.row(k) = a.sums.row(k) / static_cast<double>(a.counts[k]);

    // relocate empty centers one at a time; each relocation is re-checked
    // against a fresh assignment so the step stays non-increasing
    const int guard_max = 2 * static_cast<int>(centers.rows());
    for (int guard = 0; guard < guard_max; ++guard) {
        const auto cur = tree.filter_assign(next);
        int empty = -1;
        for (Eigen::Index k = 0; k < centers.rows(); ++k)
            if (cur.counts[k] == 0) { empty = static_cast<int>(k); break; }
        if (empty < 0) break;
        Eigen::Index far_point = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            const double d =
                (points.row(i) - next.row(cur.center_of_point[i])).squaredNorm();
            if (d > far_d) { far_d = d; far_point = i; }
        }
        if (far_d <= 0.0) break;
        next.row(empty) = points.row(far_point);
    }
    return next;
}

ClusterResult cluster(const Matrix& points, int k, const ClusterConfig& config, Rng& rng) {
    if (config.total_iters < 1 || config.max_iters_per_run < 1)
        throw std::invalid_argument("cluster: empty iteration budget");
    const KnTree tree(points);
    const bool annealed =
        config.method == ClusterMethod::SA || config.method == ClusterMethod::SAST;
    const bool tunneled = config.method == ClusterMethod::SAST;

    Matrix run_start = random_centers(points, k, rng);
    double run_start_d = distortion(tree, run_start);
    Matrix best = run_start;
    double best_d = run_start_d;

    AnnealingSchedule schedule = config.schedule;

    auto energy = [&](double d) {
        return tunneled ? tunneling_energy(d, best_d, config.tunneling) : d;
    };

    if (annealed) {
        // chained swap probes fix the initial temperature; they update the
        // best tracker but not the run state or the iteration budget
        std::vector<double> deltas;
        deltas.reserve(schedule.sample_length);
        Matrix probe = run_start;
        double prev_d = run_start_d;
        for (int l = 0; l < schedule.sample_length; ++l) {
            swap_one_center(probe, points, rng);
            const double d = distortion(tree, probe);
            if (d < best_d) { best_d = d; best = probe; }
            deltas.push_back(energy(d) - energy(prev_d));
            prev_d = d;
        }
        schedule.temperature = initial_temperature(deltas, schedule.initial_acceptance);
    }

    ClusterResult result;
    result.trace.reserve(config.total_iters);

    Matrix prev = run_start;
    bool random_step = true;
    double switch_p = 1.0;
    double last_random_d = run_start_d;
    int run = 0;
    int z_run = 0;

    for (int z = 1; z <= config.total_iters; ++z) {
        ++z_run;
        bool do_random = false;
        switch (config.method) {
        case ClusterMethod::KN: do_random = false; break;
        case ClusterMethod::RS: do_random = true; break;
        case ClusterMethod::RSKN: do_random = (z_run == 1); break;
        case ClusterMethod::SA:
        case ClusterMethod::SAST: do_random = random_step; break;
        }

        Matrix cur;
        if (do_random) {
            cur = prev;
            swap_one_center(cur, points, rng);
        } else {
            cur = lloyd_iteration(tree, prev);
        }
        const double cur_d = distortion(tree, cur);
        if (cur_d < best_d) { best_d = cur_d; best = cur; }

        result.trace.push_back({z, run, do_random, cur_d, best_d,
                                annealed ? schedule.temperature : 0.0});

        const bool stalled =
            z_run >= 2 && (run_start_d - cur_d) < config.min_improvement * run_start_d;
        const bool run_over = z_run >= config.max_iters_per_run || stalled;

        if (!run_over) {
            if (annealed) {
                if (do_random) {
                    switch_p = acceptance_probability(energy(cur_d), energy(last_random_d),
                                                      schedule.temperature);
                    last_random_d = cur_d;
                }
                schedule = cool(schedule);
                random_step = switch_p > rng.uniform01();
            }
            prev = std::move(cur);
            continue;
        }

        // run boundary: decide what the next run starts from
        if (annealed) {
            const double accept = acceptance_probability(energy(cur_d), energy(run_start_d),
                                                         schedule.temperature);
            schedule = cool(schedule);
            if (schedule.temperature < 1e-300) schedule.temperature = 1e-300;
            if (accept > rng.uniform01()) {
                run_start = std::move(cur);
                run_start_d = cur_d;
            }
        } else {
            if ((run_start_d - cur_d) >= config.min_improvement * run_start_d) {
                run_start = std::move(cur);
                run_start_d = cur_d;
            } else {
                run_start = random_centers(points, k, rng);
                run_start_d = distortion(tree, run_start);
                if (run_start_d < best_d) { best_d = run_start_d; best = run_start; }
            }
        }
        prev = run_start;
        last_random_d = run_start_d;
        random_step = true;
        z_run = 0;
        ++run;
    }

    result.centers = std::move(best);
    result.distortion = best_d;
    return result;
}

int nearest_level_index(const Vector& center) {
    if (center.size() < 1) throw std::invalid_argument("nearest_level_index: empty center");
    int best = 0;
    double best_d = -1.0;
    for (Eigen::Index n = 0; n < center.size(); ++n) {
        Vector unit = Vector::Zero(center.size());
        unit[n] = 1.0;
        const double d = (center - unit).squaredNorm();
        if (best_d < 0.0 || d < best_d) { best_d = d; best = static_cast<int>(n); }
    }
    return best + 1;
}

Matrix order_centers(const Matrix& centers) {
    std::vector<int> order(centers.rows());
    std::vector<int> level(centers.rows());
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
        order[k] = static_cast<int>(k);
        level[k] = nearest_level_index(centers.row(k).transpose());
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return level[a] < level[b]; });
    Matrix out(centers.rows(), centers.cols());
    for (Eigen::Index k = 0; k < centers.rows(); ++k) out.row(k) = centers.row(order[k]);
    return out;
}

void save_centers(const std::string& path, const CenterSet& set) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_centers: cannot open " + path);
    out << "# scar-centers v1 N=" << set.centers.cols() << " K=" << set.centers.rows()
        << " M=" << set.m << "\n";
    char buf[32];
    for (Eigen::Index r = 0; r < set.centers.rows(); ++r) {
        for (Eigen::Index c = 0; c < set.centers.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", set.centers(r, c));
            out << (c ? " " : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_centers: write failed for " + path);
}

CenterSet load_centers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_centers: cannot open " + path);
    std::string header;
    std::getline(in, header);
    int n = 0, k = 0, m = 0;
    if (std::sscanf(header.c_str(), "# scar-centers v1 N=%d K=%d M=%d", &n, &k, &m) != 3)
        throw std::runtime_error("load_centers: bad header in " + path);
    if (n < 1 || k < 1) throw std::runtime_error("load_centers: invalid dimensions");
    CenterSet set;
    set.m = m;
    set.centers.resize(k, n);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < n; ++c)
            if (!(in >> set.centers(r, c)))
                throw std::runtime_error("load_centers: truncated file " + path);
    return set;
}

std::vector<BenchmarkRow> benchmark_methods(const Dataset& dataset,
                                            const std::vector<int>& k_values,
                                            const std::vector<ClusterMethod>& methods,
                                            const std::vector<std::uint64_t>& seeds,
                                            const ClusterConfig& base) {
    std::vector<BenchmarkRow> rows;
    for (ClusterMethod method : methods) {
        for (int k : k_values) {
            for (std::uint64_t seed : seeds) {
                ClusterConfig cfg = base;
                cfg.method = method;
                Rng rng(seed);
                const auto t0 = std::chrono::steady_clock::now();
                const ClusterResult r = cluster(dataset.points, k, cfg, rng);
                const auto t1 = std::chrono::steady_clock::now();
                BenchmarkRow row;
                row.method = method;
                row.m = dataset.m;
                row.k = k;
                row.seed = seed;
                row.distortion = r.distortion;
                row.cpu_seconds = std::chrono::duration<double>(t1 - t0).count();
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void save_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_benchmark_csv: cannot open " + path);
    out << "method,M,K,seed,distortion,cpu_seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.distortion);
        out << method_name(r.method) << ',' << r.m << ',' << r.k << ',' << r.seed << ','
            << buf << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.cpu_seconds);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("save_benchmark_csv: write failed for " + path);
}

} // namespace scar
