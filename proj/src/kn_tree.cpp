#include "scar/kn_tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace scar {

bool candidate_prune(const Vector& bbox_min, const Vector& bbox_max,
                     const Vector& c_star, const Vector& c) {
    const Eigen::Index n = bbox_min.size();
    Vector v(n);
    for (Eigen::Index d = 0; d < n; ++d)
        v[d] = c[d] > c_star[d] ? bbox_max[d] : bbox_min[d];
    return (c - v).squaredNorm() >= (c_star - v).squaredNorm();
}

KnTree::KnTree(const Matrix& points) : points_(points) {
    if (points_.rows() < 1)
        throw std::invalid_argument("KnTree: empty dataset");
    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(static_cast<std::size_t>(2 * points_.rows()));
    build(0, static_cast<int>(points_.rows()), 0);
}

int KnTree::build(int begin, int end, int depth) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.bbox_min = points_.row(order_[begin]).transpose();
    node.bbox_max = node.bbox_min;
    node.sum = Vector::Zero(points_.cols());
    for (int i = begin; i < end; ++i) {
        const auto row = points_.row(order_[i]);
        node.sum += row.transpose();
        node.sumsq += row.squaredNorm();
        node.bbox_min = node.bbox_min.cwiseMin(row.transpose());
        node.bbox_max = node.bbox_max.cwiseMax(row.transpose());
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(node));
    if (end - begin <= 1) return index;

    const int dim = depth % static_cast<int>(points_.cols());
    std::sort(order_.begin() + begin, order_.begin() + end, [&](int a, int b) {
        if (points_(a, dim) != points_(b, dim)) return points_(a, dim) < points_(b, dim);
        return a < b;
    });
    const int half = (end - begin + 1) / 2; // lower median goes left
    const int left = build(begin, begin + half, depth + 1);
    const int right = build(begin + half, end, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

int KnTree::depth_of(int node_index) const {
    const Node& n = nodes_[node_index];
    if (n.left < 0) return 0;
    return 1 + std::max(depth_of(n.left), depth_of(n.right));
}

int KnTree::max_depth() const { return depth_of(0); }

void KnTree::assign_all(int node_index, int center, const Matrix& centers,
                        Assignment& out) const {
    const Node& n = nodes_[node_index];
    for (int i = n.begin; i < n.end; ++i) out.center_of_point[order_[i]] = center;
    out.counts[center] += n.end - n.begin;
    out.sums.row(center) += n.sum.transpose();
    const auto c = centers.row(center);
    out.distortion += n.sumsq - 2.0 * c.dot(n.sum.transpose()) +
                      static_cast<double>(n.end - n.begin) * c.squaredNorm();
}

void KnTree::assign_node(int node_index, const std::vector<int>& candidates,
                         const Matrix& centers, Assignment& out) const {
    const Node& n = nodes_[node_index];
    if (candidates.size() == 1) {
        assign_all(node_index, candidates[0], centers, out);
        return;
    }
    if (n.left < 0) {
        const auto p = points_.row(order_[n.begin]);
        int best = candidates[0];
        double best_d = (p - centers.row(best)).squaredNorm();
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            const double d = (p - centers.row(candidates[i])).squaredNorm();
            if (d < best_d || (d == best_d && candidates[i] < best)) {
                best = candidates[i];
                best_d = d;
            }
        }
        out.center_of_point[order_[n.begin]] = best;
        out.counts[best] += 1;
        out.sums.row(best) += p;
        out.distortion += best_d;
        return;
    }

    const Vector midpoint = 0.5 * (n.bbox_min + n.bbox_max);
    int star = candidates[0];
    double star_d = (centers.row(star).transpose() - midpoint).squaredNorm();
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double d = (centers.row(candidates[i]).transpose() - midpoint).squaredNorm();
        if (d < star_d) {
            star = candidates[i];
            star_d = d;
        }
    }

    std::vector<int> survivors;
    survivors.reserve(candidates.size());
    const Vector c_star = centers.row(star).transpose();
    for (int cand : candidates) {
        if (cand == star ||
            !candidate_prune(n.bbox_min, n.bbox_max, c_star, centers.row(cand).transpose()))
            survivors.push_back(cand);
    }
    if (survivors.size() == 1) {
        assign_all(node_index, survivors[0], centers, out);
        return;
    }
    assign_node(n.left, survivors, centers, out);
    assign_node(n.right, survivors, centers, out);
}

KnTree::Assignment KnTree::filter_assign(const Matrix& centers) const {
    if (centers.rows() < 1)
        throw std::invalid_argument("filter_assign: no centers");
    if (centers.cols() != points_.cols())
        throw std::invalid_argument("filter_assign: dimension mismatch");
    Assignment out;
    out.center_of_point.assign(points_.rows(), -1);
    out.counts.assign(centers.rows(), 0);
    out.sums = Matrix::Zero(centers.rows(), centers.cols());
    std::vector<int> candidates(centers.rows());
    std::iota(candidates.begin(), candidates.end(), 0);
    assign_node(0, candidates, centers, out);
    return out;
}

} // namespace scar
