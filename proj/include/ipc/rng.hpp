#pragma once

#include <array>
#include <cstdint>

namespace ipc {

/// xoshiro256** seeded through splitmix64. Fixed algorithm, so streams agree
/// across platforms and standard libraries.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal variates by the Marsaglia polar method on top of
/// Xoshiro256. Only +, *, log and sqrt are involved.
class NormalGenerator {
 public:
  explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}

  double operator()();
  double operator()(double mean, double sd) { return mean + sd * (*this)(); }

 private:
  Xoshiro256 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ipc
