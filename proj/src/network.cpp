#include "countnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "countnet/math.hpp"

namespace countnet {

InteractionNetwork InteractionNetwork::from_triplets(
    int n, const std::vector<std::tuple<int, int, double>>& triplets) {
  if (n < 0) throw ValidationError("network size must be non-negative");
  InteractionNetwork g(n);
  for (const auto& [i, j, w] : triplets) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ValidationError("network entry (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") is out of range for n = " +
                            std::to_string(n));
    }
    if (i == j) {
      throw ValidationError("self link at node " + std::to_string(i));
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("negative or non-finite weight on edge (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    if (w == 0.0) continue;
    g.push_entry(i, j, w);
  }
  g.sort_rows();
  for (int i = 0; i < n; ++i) {
    const auto& row = g.rows_[static_cast<std::size_t>(i)];
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].first == row[k - 1].first) {
        throw ValidationError("duplicate edge (" + std::to_string(i) + ", " +
                              std::to_string(row[k].first) + ")");
      }
    }
  }
  return g;
}

void InteractionNetwork::sort_rows() {
  for (auto& row : rows_) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
}

int InteractionNetwork::n_edges() const {
  int count = 0;
  for (const auto& row : rows_) count += static_cast<int>(row.size());
  return count;
}

double InteractionNetwork::row_sum(int i) const {
  double s = 0.0;
  for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) s += w;
  return s;
}

double InteractionNetwork::max_abs_row_sum() const {
  double best = 0.0;
  for (const auto& row : rows_) {
    double s = 0.0;
    for (const auto& [j, w] : row) s += std::fabs(w);
    best = std::max(best, s);
  }
  return best;
}

std::vector<int> InteractionNetwork::isolated_rows() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (rows_[static_cast<std::size_t>(i)].empty()) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd InteractionNetwork::multiply(const Eigen::VectorXd& v) const {
  if (v.size() != size()) throw ValidationError("network/vector size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (int i = 0; i < size(); ++i) {
    double s = 0.0;
    for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) s += w * v[j];
    out[i] = s;
  }
  return out;
}

Eigen::MatrixXd InteractionNetwork::multiply(const Eigen::MatrixXd& m) const {
  if (m.rows() != size()) throw ValidationError("network/matrix size mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size(), m.cols());
  for (int i = 0; i < size(); ++i) {
    for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) {
      out.row(i) += w * m.row(j);
    }
  }
  return out;
}

Eigen::MatrixXd InteractionNetwork::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size(), size());
  for (int i = 0; i < size(); ++i) {
    for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) out(i, j) = w;
  }
  return out;
}

InteractionNetwork InteractionNetwork::row_normalized() const {
  InteractionNetwork g(size());
  for (int i = 0; i < size(); ++i) {
    const auto& row = rows_[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (const auto& [j, w] : row) {
      if (j == i && w != 0.0) {
        throw ValidationError("row_normalized: self link at node " + std::to_string(i));
      }
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ValidationError("row_normalized: negative or non-finite weight in row " +
                              std::to_string(i));
      }
      s += w;
    }
    if (s == 0.0) continue;  // isolated rows stay all-zero
    for (const auto& [j, w] : row) {
      if (w != 0.0) g.push_entry(i, j, w / s);
    }
  }
  g.sort_rows();
  return g;
}

bool InteractionNetwork::is_row_stochastic(double tol) const {
  for (int i = 0; i < size(); ++i) {
    if (rows_[static_cast<std::size_t>(i)].empty()) continue;
    if (std::fabs(row_sum(i) - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace countnet
