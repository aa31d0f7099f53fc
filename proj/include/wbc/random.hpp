#pragma once

#include <cstdint>
#include <random>

namespace wbc {

/// Seedable generator with portable derived distributions. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard; uniform
/// and normal variates are derived by hand (53-bit midpoint uniforms and
/// Box-Muller) because the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (double(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n), by rejection.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal variate (Box-Muller, both outputs used).
  double normal();

  /// Seed for an independent child stream.
  std::uint64_t derive() { return engine_() ^ 0x9E3779B97F4A7C15ull; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace wbc
