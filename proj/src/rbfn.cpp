#include "scar/rbfn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace scar {

Vector encode_pattern(int k, int width) {
    if (width < 1) throw std::invalid_argument("encode_pattern: width must be >= 1");
    if (k < 1 || k > (1 << width))
        throw std::out_of_range("encode_pattern: cluster outside [1, 2^width]");
    Vector p(width);
    const int value = k - 1;
    for (int i = 0; i < width; ++i) {
        const int bit = (value >> (width - 1 - i)) & 1;
        p[i] = bit ? 1.0 : -1.0;
    }
    return p;
}

int decode_pattern(const Vector& outputs, int k_count) {
    if (outputs.size() < 1) throw std::invalid_argument("decode_pattern: empty outputs");
    int value = 0;
    for (Eigen::Index i = 0; i < outputs.size(); ++i)
        value = (value << 1) | (outputs[i] >= 0.0 ? 1 : 0);
    int k = value + 1;
    if (k > k_count) k = k_count;
    return k;
}

PatternCodebook::PatternCodebook(int k) : k_count(k) {
    if (k < 2) throw std::invalid_argument("PatternCodebook: need at least two clusters");
    width = 1;
    while ((1 << width) < k) ++width;
}

RbfnModel make_rbfn(const Matrix& centers, double sigma, double eta, Rng& rng) {
    if (centers.rows() < 2) throw std::invalid_argument("make_rbfn: need at least two centers");
    if (sigma <= 0.0 || eta <= 0.0)
        throw std::invalid_argument("make_rbfn: sigma and eta must be positive");
    PatternCodebook codebook(static_cast<int>(centers.rows()));
    RbfnModel model;
    model.centers = centers;
    model.sigma = sigma;
    model.eta = eta;
    model.weights.resize(centers.rows(), codebook.width);
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
            model.weights(r, c) = rng.uniform(-0.1, 0.1);
    return model;
}

Vector hidden_activations(const RbfnModel& model, const Vector& y) {
    if (y.size() != model.centers.cols())
        throw std::invalid_argument("hidden_activations: dimension mismatch");
    const double denom = 2.0 * model.sigma * model.sigma;
    Vector h(model.centers.rows());
    for (Eigen::Index k = 0; k < model.centers.rows(); ++k)
        h[k] = std::exp(-(y.transpose() - model.centers.row(k)).squaredNorm() / denom);
    return h;
}

Vector forward(const RbfnModel& model, const Vector& y) {
    const Vector h = hidden_activations(model, y);
    return (model.weights.transpose() * h).array().tanh();
}

double mse_error(const Vector& pattern, const Vector& outputs) {
    if (pattern.size() != outputs.size() || pattern.size() < 1)
        throw std::invalid_argument("mse_error: size mismatch");
    return (pattern - outputs).squaredNorm() / static_cast<double>(pattern.size());
}

void backprop_update(RbfnModel& model, const Vector& y, const Vector& pattern) {
    if (pattern.size() != model.weights.cols())
        throw std::invalid_argument("backprop_update: pattern width mismatch");
    const Vector h = hidden_activations(model, y);
    const Vector out = (model.weights.transpose() * h).array().tanh();
    const Vector delta =
        (1.0 - out.array().square()) * (pattern.array() - out.array());
    model.weights += model.eta * h * delta.transpose();
}

int classify(const RbfnModel& model, const Vector& y) {
    return decode_pattern(forward(model, y), static_cast<int>(model.centers.rows()));
}

std::vector<LabeledSample> label_by_nearest(const Matrix& points, const Matrix& centers) {
    std::vector<LabeledSample> out;
    out.reserve(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        int best = 0;
        double best_d = (points.row(i) - centers.row(0)).squaredNorm();
        for (Eigen::Index k = 1; k < centers.rows(); ++k) {
            const double d = (points.row(i) - centers.row(k)).squaredNorm();
            if (d < best_d) { best_d = d; best = static_cast<int>(k); }
        }
        out.push_back({points.row(i).transpose(), best + 1});
    }
    return out;
}

double mean_error(const RbfnModel& model, const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("mean_error: no samples");
    PatternCodebook codebook(static_cast<int>(model.centers.rows()));
    double sum = 0.0;
    for (const auto& s : samples)
        sum += mse_error(codebook.pattern(s.cluster), forward(model, s.y));
    return sum / static_cast<double>(samples.size());
}

double classification_accuracy(const RbfnModel& model,
                               const std::vector<LabeledSample>& samples) {
    if (samples.empty())
        throw std::invalid_argument("classification_accuracy: no samples");
    int hits = 0;
    for (const auto& s : samples)
        if (classify(model, s.y) == s.cluster) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

RbfnTrainResult sast_train(const RbfnModel& init, const std::vector<LabeledSample>& labeled,
                           const SampleStream& stream, const RbfnTrainConfig& config,
                           Rng& rng) {
    if (config.total_iters < 1 || config.iters_per_run < 1)
        throw std::invalid_argument("sast_train: empty iteration budget");
    const bool annealed = config.mode == RbfnTrainMode::Sast;
    if (annealed && labeled.empty())
        throw std::invalid_argument("sast_train: labeled pool required");

    RbfnModel model = init;
    PatternCodebook codebook(static_cast<int>(model.centers.rows()));

    const double inf = std::numeric_limits<double>::infinity();
    Matrix best_weights = model.weights;
    double best_error = inf;
    Matrix epoch_weights = model.weights;
    double epoch_error = inf;
    double prev_error = inf;

    AnnealingSchedule schedule = config.schedule;
    const long warmup = annealed ? schedule.sample_length : 0;
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(warmup));

    bool use_labeled = false;
    std::size_t labeled_pos = 0;

    auto energy = [&](double e) { return tunneling_energy(e, best_error, config.tunneling); };

    RbfnTrainResult result;
    result.error_trace.reserve(static_cast<std::size_t>(config.total_iters));

    for (long z = 1; z <= config.total_iters; ++z) {
        LabeledSample sample;
        if (use_labeled) {
            sample = labeled[labeled_pos % labeled.size()];
            ++labeled_pos;
        } else {
            sample = stream();
        }
        const Vector pattern = codebook.pattern(sample.cluster);
        backprop_update(model, sample.y, pattern);
        const double error = mse_error(pattern, forward(model, sample.y));
        if (error < best_error) {
            best_error = error;
            best_weights = model.weights;
        }
        result.error_trace.push_back(error);

        if (annealed) {
            if (z <= warmup) {
                if (z >= 2) deltas.push_back(energy(error) - energy(prev_error));
                if (z == warmup)
                    schedule.temperature =
                        initial_temperature(deltas, schedule.initial_acceptance);
                use_labeled = false;
            } else {
                use_labeled = !metropolis_step(energy(error), energy(prev_error), schedule,
                                               rng.uniform01());
            }
            prev_error = error;

            if (z % config.iters_per_run == 0) {
                if (error < epoch_error) {
                    epoch_weights = model.weights;
                    epoch_error = error;
                } else if (z > warmup) {
                    const double accept = acceptance_probability(
                        energy(error), energy(epoch_error), schedule.temperature);
                    if (accept > rng.uniform01()) {
                        epoch_weights = model.weights;
                        epoch_error = error;
                    } else {
                        model.weights = epoch_weights;
                        prev_error = epoch_error;
                    }
                }
                if (z > warmup) {
                    schedule = cool(schedule);
                    if (schedule.temperature < 1e-300) schedule.temperature = 1e-300;
                }
                use_labeled = false;
            }
        }
    }

    result.model = model;
    result.model.weights = best_weights;
    result.best_error = best_error;
    return result;
}

std::vector<SweepRow> hyperparameter_sweep(const Matrix& centers, int m,
                                           const std::vector<LabeledSample>& train_pool,
                                           const std::vector<LabeledSample>& validation,
                                           const std::vector<double>& sigmas,
                                           const std::vector<double>& etas,
                                           const RbfnTrainConfig& base, std::uint64_t seed) {
    if (train_pool.empty() || validation.empty())
        throw std::invalid_argument("hyperparameter_sweep: empty sample pools");
    std::vector<SweepRow> rows;
    for (double sigma : sigmas) {
        for (double eta : etas) {
            Rng rng(seed);
            Rng stream_rng = rng.split();
            RbfnModel model = make_rbfn(centers, sigma, eta, rng);
            const SampleStream stream = [&train_pool, &stream_rng]() {
                return train_pool[stream_rng.uniform_below(train_pool.size())];
            };
            const RbfnTrainResult r = sast_train(model, train_pool, stream, base, rng);
            SweepRow row;
            row.m = m;
            row.k = static_cast<int>(centers.rows());
            row.sigma = sigma;
            row.eta = eta;
            row.seed = seed;
            row.final_error = mean_error(r.model, validation);
            rows.push_back(row);
        }
    }
    return rows;
}

void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_sweep_csv: cannot open " + path);
    out << "M,K,sigma,eta,seed,final_error\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.m << ',' << r.k << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.sigma);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.eta);
        out << buf << ',' << r.seed << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.final_error);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("save_sweep_csv: write failed for " + path);
}

void save_rbfn(const std::string& path, const RbfnModel& model, int m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_rbfn: cannot open " + path);
    char buf[32];
    out << "# scar-rbfn v1\n";
    out << "N " << model.centers.cols() << "\n";
    out << "M " << m << "\n";
    out << "K " << model.centers.rows() << "\n";
    out << "O " << model.weights.cols() << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", model.sigma);
    out << "sigma " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", model.eta);
    out << "eta " << buf << "\n";
    out << "centers\n";
    for (Eigen::Index r = 0; r < model.centers.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.centers.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", model.centers(r, c));
            out << (c ? " " : "") << buf;
        }
        out << '\n';
    }
    out << "weights\n";
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", model.weights(r, c));
            out << (c ? " " : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_rbfn: write failed for " + path);
}

RbfnModel load_rbfn(const std::string& path, int* m_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_rbfn: cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line != "# scar-rbfn v1") throw std::runtime_error("load_rbfn: bad header in " + path);

    auto expect_field = [&](const char* name) {
        std::string key;
        double value = 0.0;
        if (!(in >> key >> value) || key != name)
            throw std::runtime_error(std::string("load_rbfn: missing field ") + name);
        return value;
    };
    const int n = static_cast<int>(expect_field("N"));
    const int m = static_cast<int>(expect_field("M"));
    const int k = static_cast<int>(expect_field("K"));
    const int o = static_cast<int>(expect_field("O"));
    RbfnModel model;
    model.sigma = expect_field("sigma");
    model.eta = expect_field("eta");
    if (n < 1 || k < 2 || o < 1)
        throw std::runtime_error("load_rbfn: invalid dimensions in " + path);

    std::string tag;
    if (!(in >> tag) || tag != "centers")
        throw std::runtime_error("load_rbfn: missing centers block");
    model.centers.resize(k, n);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < n; ++c)
            if (!(in >> model.centers(r, c)))
                throw std::runtime_error("load_rbfn: truncated centers block");
    if (!(in >> tag) || tag != "weights")
        throw std::runtime_error("load_rbfn: missing weights block");
    model.weights.resize(k, o);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < o; ++c)
            if (!(in >> model.weights(r, c)))
                throw std::runtime_error("load_rbfn: truncated weights block");
    if (m_out) *m_out = m;
    return model;
}

} // namespace scar
