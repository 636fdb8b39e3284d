#ifndef COUNTNET_NETWORK_HPP
#define COUNTNET_NETWORK_HPP

// Sparse row-list representation of an interaction network. Rows hold
// (column, weight) pairs sorted by column; an agent with no links simply has
// an empty row. Networks used by the game are row normalized, so each row
// sums to one or is entirely zero.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace countnet {

class InteractionNetwork {
public:
  InteractionNetwork() = default;
  explicit InteractionNetwork(int n) : rows_(static_cast<std::size_t>(n)) {}

  // Builds from (i, j, weight) triplets. Rejects out-of-range indices,
  // self links, negative weights and duplicate entries.
  static InteractionNetwork from_triplets(
      int n, const std::vector<std::tuple<int, int, double>>& triplets);

  int size() const { return static_cast<int>(rows_.size()); }
  int n_edges() const;

  const std::vector<std::pair<int, double>>& row(int i) const {
    return rows_[static_cast<std::size_t>(i)];
  }

  // Appends an entry without validation; callers must keep columns sorted or
  // call sort_rows() afterwards.
  void push_entry(int i, int j, double w) {
    rows_[static_cast<std::size_t>(i)].emplace_back(j, w);
  }
  void sort_rows();

  double row_sum(int i) const;
  // max_i sum_j |g_ij|
  double max_abs_row_sum() const;
  std::vector<int> isolated_rows() const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXd to_dense() const;

  // Divides every nonzero row by its sum. Requires non-negative weights and a
  // zero diagonal; zero rows are kept as they are.
  InteractionNetwork row_normalized() const;

  // True when every row sums to 1 within tol or is empty.
  bool is_row_stochastic(double tol = 1e-12) const;

private:
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

}  // namespace countnet

#endif
