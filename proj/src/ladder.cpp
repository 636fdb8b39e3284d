#include "countnet/ladder.hpp"

#include <cmath>
#include <string>

#include "countnet/math.hpp"

namespace countnet {

void CostLadder::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("ladder: lambda must be finite and >= 0");
  }
  for (std::size_t k = 0; k < free_increments.size(); ++k) {
    if (!(free_increments[k] > lambda) || !std::isfinite(free_increments[k])) {
      throw ValidationError("ladder: increment delta_" + std::to_string(k + 2) +
                            " must exceed lambda");
    }
  }
  if (!(delta_bar > 0.0) || !std::isfinite(delta_bar)) {
    throw ValidationError("ladder: delta_bar must be > 0");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ValidationError("ladder: rho must be > 0");
  }
}

double CostLadder::increment(int r) const {
  if (r < 2) throw ValidationError("ladder: increments start at r = 2");
  if (r <= r_bar()) return free_increments[static_cast<std::size_t>(r - 2)];
  return std::pow(static_cast<double>(r - 1), rho) * delta_bar + lambda;
}

std::vector<double> CostLadder::cut_points(int r_max) const {
  if (r_max < 1) throw ValidationError("ladder: r_max must be >= 1");
  std::vector<double> a(static_cast<std::size_t>(r_max));
  a[0] = 0.0;
  for (int r = 2; r <= r_max; ++r) {
    a[static_cast<std::size_t>(r - 1)] = a[static_cast<std::size_t>(r - 2)] + increment(r);
  }
  return a;
}

}  // namespace countnet
