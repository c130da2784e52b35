#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/error.hpp"

namespace ximarkov {

/// Static k-d tree over the rows of a matrix; exact Euclidean nearest neighbours.
/// Among points at equal distance the one with the smaller row index wins.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& points) : n_(points.rows()), dim_(points.cols()) {
    require(n_ >= 1 && dim_ >= 1, ErrorKind::InvalidParameter, "k-d tree needs a nonempty matrix");
    data_.resize(static_cast<std::size_t>(n_ * dim_));
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < dim_; ++j) data_[i * dim_ + j] = points(i, j);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    nodes_.reserve(2 * static_cast<std::size_t>(n_ / kLeaf + 1));
    build(0, n_);
  }

  /// Nearest row to row i other than i itself (requires at least two rows).
  Eigen::Index nearest_other(Eigen::Index i) const {
    require(n_ >= 2, ErrorKind::InvalidParameter, "nearest neighbour needs two points");
    Best best;
    search(0, &data_[i * dim_], i, best);
    return best.index;
  }

  std::vector<Eigen::Index> all_nearest_others() const {
    std::vector<Eigen::Index> out(n_);
    for (Eigen::Index i = 0; i < n_; ++i) out[i] = nearest_other(i);
    return out;
  }

 private:
  static constexpr Eigen::Index kLeaf = 8;

  struct Node {
    Eigen::Index begin, end;  // range in order_
    Eigen::Index split_dim = -1;
    double split = 0.0;
    int left = -1, right = -1;
  };

  struct Best {
    double dist2 = std::numeric_limits<double>::infinity();
    Eigen::Index index = -1;

    bool improves(double d2, Eigen::Index j) const { return d2 < dist2 || (d2 == dist2 && j < index); }
  };

  double coord(Eigen::Index row, Eigen::Index j) const { return data_[row * dim_ + j]; }

  int build(Eigen::Index begin, Eigen::Index end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;
    Eigen::Index best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index j = 0; j < dim_; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Eigen::Index k = begin; k < end; ++k) {
        lo = std::min(lo, coord(order_[k], j));
        hi = std::max(hi, coord(order_[k], j));
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = j;
      }
    }
    if (best_spread <= 0.0) return id;  // all points coincide
    const Eigen::Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) { return coord(a, best_dim) < coord(b, best_dim); });
    nodes_[id].split_dim = best_dim;
    nodes_[id].split = coord(order_[mid], best_dim);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(int id, const double* q, Eigen::Index self, Best& best) const {
    const Node& node = nodes_[id];
    if (node.split_dim < 0) {
      for (Eigen::Index k = node.begin; k < node.end; ++k) {
        const Eigen::Index j = order_[k];
        if (j == self) continue;
        double d2 = 0.0;
        for (Eigen::Index c = 0; c < dim_; ++c) {
          const double diff = coord(j, c) - q[c];
          d2 += diff * diff;
        }
        if (best.improves(d2, j)) best = {d2, j};
      }
      return;
    }
    const double delta = q[node.split_dim] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, self, best);
    // equal distance may still hide a smaller index on the far side
    if (delta * delta <= best.dist2) search(far, q, self, best);
  }

  Eigen::Index n_, dim_;
  std::vector<double> data_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace ximarkov
