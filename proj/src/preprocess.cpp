#include "scar/preprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scar {

Vector histogram(const CqiReport& report, int n_levels) {
    if (n_levels < 1)
        throw std::invalid_argument("histogram: need at least one CQI level");
    if (report.values.empty())
        throw std::invalid_argument("histogram: empty report");
    Vector bins = Vector::Zero(n_levels);
    const double weight = 1.0 / static_cast<double>(report.values.size());
    for (int v : report.values) {
        if (v < 1 || v > n_levels)
            throw std::out_of_range("histogram: CQI value outside [1, N]");
        bins[v - 1] += weight;
    }
    return bins;
}

TopMVector top_m_reduce(const Vector& hist, int m) {
    const int n = static_cast<int>(hist.size());
    if (m < 1) throw std::invalid_argument("top_m_reduce: m must be >= 1");
    for (int i = 0; i < n; ++i)
        if (hist[i] < 0.0)
            throw std::invalid_argument("top_m_reduce: negative bin");

    std::vector<int> nonzero;
    for (int i = 0; i < n; ++i)
        if (hist[i] > 0.0) nonzero.push_back(i);

    TopMVector out;
    out.m = m;
    if (static_cast<int>(nonzero.size()) <= m) {
        out.bins = hist;
        return out;
    }

    // rank by value descending, index ascending
    std::vector<int> order = nonzero;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (hist[a] != hist[b]) return hist[a] > hist[b];
        return a < b;
    });
    std::vector<int> kept(order.begin(), order.begin() + m);
    std::sort(kept.begin(), kept.end());

    out.bins = Vector::Zero(n);
    for (int i : kept) out.bins[i] = hist[i];
    for (int i = m; i < static_cast<int>(order.size()); ++i) {
        const int src = order[i];
        int best = kept[0];
        int best_dist = std::abs(src - best);
        for (int k : kept) {
            const int d = std::abs(src - k);
            if (d < best_dist) { best = k; best_dist = d; }
        }
        out.bins[best] += hist[src];
    }
    return out;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    out << "# scar-dataset v1 N=" << dataset.n_levels << " M=" << dataset.m << "\n";
    char buf[32];
    for (Eigen::Index r = 0; r < dataset.points.rows(); ++r) {
        out << dataset.m;
        for (Eigen::Index c = 0; c < dataset.points.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", dataset.points(r, c));
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string header;
    std::getline(in, header);
    Dataset ds;
    if (std::sscanf(header.c_str(), "# scar-dataset v1 N=%d M=%d", &ds.n_levels, &ds.m) != 2)
        throw std::runtime_error("load_dataset: bad header in " + path);
    if (ds.n_levels < 1 || ds.m < 1)
        throw std::runtime_error("load_dataset: invalid dimensions in " + path);

    std::vector<Vector> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int m = 0;
        if (!(ss >> m) || m != ds.m)
            throw std::runtime_error("load_dataset: record M mismatch in " + path);
        Vector v(ds.n_levels);
        for (int i = 0; i < ds.n_levels; ++i)
            if (!(ss >> v[i]))
                throw std::runtime_error("load_dataset: truncated record in " + path);
        rows.push_back(std::move(v));
    }
    ds.points.resize(static_cast<Eigen::Index>(rows.size()), ds.n_levels);
    for (std::size_t i = 0; i < rows.size(); ++i)
        ds.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return ds;
}

} // namespace scar
