#include "padlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace padlab {
namespace detail {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::uint32_t key0, std::uint32_t key1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key0, lo1, hi0 ^ ctr[3] ^ key1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t counter,
                                        std::uint64_t stream,
                                        std::uint64_t seed) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter),
      static_cast<std::uint32_t>(counter >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32),
  };
  std::uint32_t key0 = static_cast<std::uint32_t>(seed);
  std::uint32_t key1 = static_cast<std::uint32_t>(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key0, key1);
    key0 += kPhiloxW0;
    key1 += kPhiloxW1;
  }
  return ctr;
}

namespace {

constexpr double kTwoPow53Inv = 0x1.0p-53;

inline std::uint64_t join64(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(lo) |
         (static_cast<std::uint64_t>(hi) << 32);
}

// Two normals from one block: z0 = r*cos(theta), z1 = r*sin(theta).
inline void normal_pair(const RngSpec& rng, std::uint64_t block_index,
                        double& z0, double& z1) {
  const auto block = detail::philox4x32(block_index, rng.stream, rng.seed);
  const std::uint64_t a = join64(block[0], block[1]);
  const std::uint64_t b = join64(block[2], block[3]);
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  const double u1 = static_cast<double>((a >> 11) + 1) * kTwoPow53Inv;
  const double u2 = static_cast<double>(b >> 11) * kTwoPow53Inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

}  // namespace
}  // namespace detail

double uniform01_at(const RngSpec& rng, std::uint64_t index) {
  const auto block = detail::philox4x32(index, rng.stream, rng.seed);
  const std::uint64_t a = detail::join64(block[0], block[1]);
  return static_cast<double>(a >> 11) * detail::kTwoPow53Inv;
}

double normal_at(const RngSpec& rng, std::uint64_t index) {
  double z0 = 0.0;
  double z1 = 0.0;
  detail::normal_pair(rng, index >> 1, z0, z1);
  return (index & 1u) ? z1 : z0;
}

FeatureMap sample_gaussian(int channels, GridSize size, const RngSpec& rng) {
  FeatureMap map(channels, size, 0.0);
  auto values = map.values();
  const std::uint64_t n = values.size();
  std::uint64_t f = 0;
  for (; f + 1 < n; f += 2) {
    detail::normal_pair(rng, f >> 1, values[f], values[f + 1]);
  }
  if (f < n) {
    double z0 = 0.0;
    double z1 = 0.0;
    detail::normal_pair(rng, f >> 1, z0, z1);
    values[f] = z0;
  }
  return map;
}

}  // namespace padlab
