#pragma once

#include <cstdint>
#include <random>

namespace ddc {

/// Seeded random stream. One stream per simulated path; the `stream` id
/// separates independent sources drawn for the same seed (e.g. Gaussian
/// increments vs. jump arrivals) so that adding one source never shifts
/// the draws of another.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint32_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream, 0x9e3779b9u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0);
    return u;
  }

  double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed of replicate `r` under base seed `base`.
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t r) { return base + r; }

}  // namespace ddc
