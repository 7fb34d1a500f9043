#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace nopo {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trajectory random stream. Each trajectory owns an independent engine
// seeded from (master_seed, trajectory_index), so ensemble results do not
// depend on how trajectories are distributed over workers.
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t master_seed, std::uint64_t trajectory_index)
      : engine_(splitmix64(splitmix64(master_seed) ^
                           splitmix64(trajectory_index + 0x51ed2700)) ) {}

  double gaussian() { return normal_(engine_); }

  // Wiener increment of a real process over dt: N(0, dt).
  double real_increment(double sqrt_dt) { return sqrt_dt * gaussian(); }

  // Wiener increment of a complex process over dt: real and imaginary parts
  // independent N(0, dt), giving <|dW|^2> = 2 dt and <dW^2> = 0.
  std::complex<double> complex_increment(double sqrt_dt) {
    const double re = gaussian();
    const double im = gaussian();
    return {sqrt_dt * re, sqrt_dt * im};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nopo
