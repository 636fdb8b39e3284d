#include "countnet/rng.hpp"

#include "countnet/math.hpp"

namespace countnet {

double Rng::normal() {
  return math::norm_quantile(uniform());
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling to stay unbiased.
  const std::uint64_t limit = n * ((~0ULL) / n);
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

}  // namespace countnet
