#pragma once

#include "scar/types.hpp"

#include <string>
#include <vector>

namespace scar {

// One user's per-RB CQI feedback for one TTI. Values are 1-based CQI levels.
struct CqiReport {
    int user_id = 0;
    long tti = 0;
    std::vector<int> values;
};

// Normalized CQI histogram: bin n holds the fraction of RBs reporting level n+1.
Vector histogram(const CqiReport& report, int n_levels);

// Histogram holding at most m nonzero bins.
struct TopMVector {
    Vector bins;
    int m = 0;
};

// Keep the m largest bins (ties: larger value first, then lower index) and move
// each dropped bin's mass to the nearest kept index (equidistant: lower index).
TopMVector top_m_reduce(const Vector& hist, int m);

// Deduplicated corpus of reduced histograms, one row per unique vector.
struct Dataset {
    Matrix points;   // U x N
    int n_levels = 0;
    int m = 0;
};

void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

} // namespace scar
