#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pure/common.hpp"

namespace pure {

// One label per independent stream of randomness; a (seed, label) pair always
// reproduces the same sequence regardless of what other streams consumed.
enum class Stream : std::uint64_t {
  Split = 1,
  UnlabeledSampling = 2,
  Noise = 3,
  Init = 4,
  Pool = 5,
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, Stream label) : seed_(seed), label_(label) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(label)};
    gen_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  Stream label() const { return label_; }

  // Same label, distinct salt: used for per-user candidate pools so parallel
  // evaluation stays order-independent.
  RngStream derive(std::uint64_t salt) const {
    return RngStream(seed_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1)), label_);
  }

  std::uint64_t next_u64() { return gen_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via rejection.
  std::int64_t uniform_int(std::int64_t n) {
    if (n <= 0) throw Error("uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  // Standard normal, Box-Muller; hand-rolled so sequences are identical across
  // standard library implementations.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {  // Fisher-Yates
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i)))]);
    }
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
  Stream label_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pure
