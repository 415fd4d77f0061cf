#pragma once

// Seeded sampling of big integers and small rationals (GMP Mersenne twister).

#include "readop/numeric.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace readop {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(gmp_randinit_mt) { rng_.seed(Int(std::to_string(seed))); }

  /// Uniform on [lo, hi].
  Int uniform(const Int& lo, const Int& hi) {
    if (hi < lo) throw std::invalid_argument("empty sampling range");
    return lo + Int(rng_.get_z_range(Int(hi - lo + 1)));
  }
  long uniform(long lo, long hi) { return uniform(Int(lo), Int(hi)).get_si(); }

  /// Nonzero p/q with |p|, q <= 1000.
  Rational rational() {
    Int p = uniform(Int(1), Int(1000));
    if (uniform(0L, 1L) == 0) p = -p;
    return make_ratio(p, uniform(Int(1), Int(1000)));
  }

 private:
  gmp_randclass rng_;
};

}  // namespace readop
