#pragma once

#include "scar/types.hpp"

#include <vector>

namespace scar {

// Candidate pruning rule for the filtering assignment: center c can be
// discarded for a cell when the cell's extreme vertex toward c is still at
// least as close to c_star as to c. Squared distances throughout.
bool candidate_prune(const Vector& bbox_min, const Vector& bbox_max,
                     const Vector& c_star, const Vector& c);

// Balanced KD-tree over dataset rows with per-node tight bounding boxes and
// cached point sums, used for bulk nearest-center assignment.
class KnTree {
public:
    explicit KnTree(const Matrix& points);

    const Matrix& points() const { return points_; }
    int size() const { return static_cast<int>(points_.rows()); }
    int max_depth() const;

    struct Assignment {
        std::vector<int> center_of_point; // per dataset row, index into centers
        std::vector<int> counts;          // per center
        Matrix sums;                      // per center: sum of assigned rows
        double distortion = 0.0;          // sum of squared distances
    };

    // Exact nearest-center assignment (ties go to the lowest center index).
    Assignment filter_assign(const Matrix& centers) const;

private:
    struct Node {
        Vector bbox_min;
        Vector bbox_max;
        Vector sum;
        double sumsq = 0.0;
        int begin = 0;
        int end = 0;
        int left = -1;
        int right = -1;
    };

    Matrix points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;

    int build(int begin, int end, int depth);
    void assign_node(int node_index, const std::vector<int>& candidates,
                     const Matrix& centers, Assignment& out) const;
    void assign_all(int node_index, int center, const Matrix& centers,
                    Assignment& out) const;
    int depth_of(int node_index) const;
};

} // namespace scar
