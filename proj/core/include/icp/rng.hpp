#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace icp {

/// SplitMix64 finalizer. Used to derive independent per-replica seeds from a
/// master seed so that replica k always sees the same stream regardless of
/// how replicas are scheduled.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// 64-bit Mersenne twister with hand-rolled variate transforms. The std
/// distributions are implementation-defined, so they are avoided to keep
/// trajectories bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  /// Exp(rate) holding time.
  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace icp
