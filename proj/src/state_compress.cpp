#include "scar/state_compress.hpp"

#include <cmath>
#include <stdexcept>

namespace scar {

Vector classify_population(const std::vector<Vector>& histograms, const RbfnModel& model,
                           int user_count) {
    if (user_count < 1)
        throw std::invalid_argument("classify_population: user count must be >= 1");
    if (static_cast<int>(histograms.size()) > user_count)
        throw std::invalid_argument("classify_population: more reports than users");
    Vector shares = Vector::Zero(model.centers.rows());
    const double w = 1.0 / static_cast<double>(user_count);
    for (const Vector& y : histograms) shares[classify(model, y) - 1] += w;
    return shares;
}

CompressedFeatures extract_features(const Vector& shares) {
    const Eigen::Index k = shares.size();
    if (k < 1) throw std::invalid_argument("extract_features: empty share vector");
    for (Eigen::Index i = 0; i < k; ++i)
        if (shares[i] < 0.0)
            throw std::invalid_argument("extract_features: negative share");
    if (shares.sum() > 1.0 + 1e-9)
        throw std::invalid_argument("extract_features: shares exceed 1");

    CompressedFeatures f;
    for (Eigen::Index i = 0; i < k; ++i)
        if (shares[i] > 0.0) ++f.active_classes;
    if (f.active_classes == 0) {
        f.dispersion = 0.0;
        f.support_distance = 1.0;
        f.support_index = 1;
        return f;
    }

    const double uniform = 1.0 / static_cast<double>(f.active_classes);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        if (shares[i] > 0.0) {
            const double d = shares[i] - uniform;
            dev += d * d;
        }
    f.dispersion = dev / static_cast<double>(f.active_classes);

    double best = -1.0;
    int best_index = 0;
    const double sumsq = shares.squaredNorm();
    for (Eigen::Index i = 0; i < k; ++i) {
        // ||shares - e_i||^2 = sumsq - 2 s_i + 1
        const double d = sumsq - 2.0 * shares[i] + 1.0;
        if (best < 0.0 || d < best) { best = d; best_index = static_cast<int>(i); }
    }
    f.support_distance = std::sqrt(best > 0.0 ? best : 0.0);
    f.support_index = best_index + 1;
    return f;
}

ControllerState build_state(double alpha_prev, double beta_prev,
                            std::span<const double> throughputs,
                            const CompressedFeatures& features, int active_users) {
    if (throughputs.empty())
        throw std::invalid_argument("build_state: no throughput samples");
    ControllerState s;
    s.alpha_prev = alpha_prev;
    s.beta_prev = beta_prev;
    double mean = 0.0;
    for (double t : throughputs) mean += t;
    mean /= static_cast<double>(throughputs.size());
    double var = 0.0;
    for (double t : throughputs) var += (t - mean) * (t - mean);
    var /= static_cast<double>(throughputs.size());
    s.thr_mean = mean;
    s.thr_std = std::sqrt(var);
    s.features = features;
    s.active_users = active_users;
    return s;
}

namespace {
double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }
// fairness parameters live in [-1,1]; min-max them like every other feature
double unit_param(double x) { return clamp01(0.5 * (x + 1.0)); }
} // namespace

Vector normalized_state(const ControllerState& state, const StateNormalization& norm) {
    if (norm.k_count < 2 || norm.thr_max <= 0.0 || norm.max_users < 1)
        throw std::invalid_argument("normalized_state: bad normalization constants");
    Vector out(9);
    out[0] = unit_param(state.alpha_prev);
    out[1] = unit_param(state.beta_prev);
    out[2] = clamp01(state.thr_mean / norm.thr_max);
    out[3] = clamp01(state.thr_std / norm.thr_max);
    out[4] = clamp01(static_cast<double>(state.features.active_classes) / norm.k_count);
    out[5] = clamp01(state.features.dispersion / 0.25);
    out[6] = clamp01(state.features.support_distance / std::sqrt(2.0));
    out[7] = clamp01(static_cast<double>(state.features.support_index - 1) /
                     static_cast<double>(norm.k_count - 1));
    out[8] = clamp01(static_cast<double>(state.active_users) /
                     static_cast<double>(norm.max_users));
    return out;
}

int StateBuilder::dim() const {
    if (mode == StateMode::Compressed) return 9;
    return 5 + 2 * static_cast<int>(model.centers.cols());
}

Vector StateBuilder::build(double alpha_prev, double beta_prev,
                           const std::vector<CqiReport>& reports,
                           std::span<const double> throughputs) const {
    const int n = static_cast<int>(model.centers.cols());
    const int users = static_cast<int>(reports.size());
    std::vector<Vector> reduced;
    reduced.reserve(reports.size());
    for (const auto& r : reports) reduced.push_back(top_m_reduce(histogram(r, n), m).bins);

    if (mode == StateMode::Compressed) {
        const Vector shares =
            users > 0 ? classify_population(reduced, model, users) : Vector::Zero(model.centers.rows());
        const CompressedFeatures f = extract_features(shares);
        const ControllerState s =
            build_state(alpha_prev, beta_prev, throughputs, f, users);
        return normalized_state(s, norm);
    }

    // ablation: per-bin mean and deviation across users instead of the
    // classifier features
    Vector out(dim());
    const ControllerState s =
        build_state(alpha_prev, beta_prev, throughputs, CompressedFeatures{}, users);
    out[0] = unit_param(s.alpha_prev);
    out[1] = unit_param(s.beta_prev);
    out[2] = clamp01(s.thr_mean / norm.thr_max);
    out[3] = clamp01(s.thr_std / norm.thr_max);
    out[4] = clamp01(static_cast<double>(users) / static_cast<double>(norm.max_users));
    Vector mean = Vector::Zero(n);
    for (const Vector& v : reduced) mean += v;
    if (users > 0) mean /= static_cast<double>(users);
    Vector var = Vector::Zero(n);
    for (const Vector& v : reduced) var += (v - mean).cwiseProduct(v - mean);
    if (users > 0) var /= static_cast<double>(users);
    for (int i = 0; i < n; ++i) {
        out[5 + i] = clamp01(mean[i]);
        out[5 + n + i] = clamp01(std::sqrt(var[i]) / 0.5);
    }
    return out;
}

} // namespace scar
