#pragma once

#include <cstdint>
#include <cmath>

#include "kruppa/geometry.hpp"

namespace kruppa {

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed; used for per-trial RANSAC substreams
/// and per-instance benchmark seeds.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  splitmix64(s);
  return s;
}

/// Deterministic generator with a platform-pinned output sequence (no
/// standard-library distributions involved).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) { splitmix64(state_); }

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) {  // [0, n)
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
  }

  // Box-Muller; one draw per call keeps the stream layout obvious.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec3 unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(r * std::cos(phi), r * std::sin(phi), z);
  }

  Mat3 rotation(double angle_magnitude) {
    if (angle_magnitude == 0.0) return Mat3::Identity();
    const Vec3 axis = unit_vector();
    return Eigen::AngleAxisd(angle_magnitude, axis).toRotationMatrix();
  }

  Mat3 random_rotation() {
    const double angle = uniform(0.0, M_PI);
    return rotation(angle);
  }

 private:
  uint64_t state_;
};

}  // namespace kruppa
