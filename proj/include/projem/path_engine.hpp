#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace projem {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

/// Maps a 32-bit word to the open unit interval.
inline double unit_open(std::uint32_t x) { return (double(x) + 0.5) * 0x1p-32; }

/// Location of one increment stream.
struct StreamAddress {
    std::uint64_t path = 0;
    std::uint32_t level = 0;   // grid or MLMC level; < 2^24
    std::uint32_t factor = 0;  // Brownian factor; < 256
};

/// Seeded family of independent Gaussian streams addressed by (path, level, factor).
class BrownianFabric {
public:
    explicit BrownianFabric(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Standard normals for an address; element i is a fixed function of (seed, address, i).
    void normals(StreamAddress address, std::span<double> out) const;

    /// Normal(0, h) increments.
    void increments(StreamAddress address, double h, std::span<double> out) const;
    std::vector<double> increments(StreamAddress address, std::size_t n, double h) const;

private:
    std::uint64_t seed_;
};

/// coarse[i] = fine[iM] + ... + fine[iM + M - 1], summed left to right.
void couple_levels(std::span<const double> fine, std::size_t refinement, std::span<double> coarse);
std::vector<double> couple_levels(std::span<const double> fine, std::size_t refinement);

/// z = rho w + sqrt(1 - rho^2) w_perp.
void correlate(std::span<const double> w, std::span<const double> w_perp, double rho,
               std::span<double> z);
std::vector<double> correlate(std::span<const double> w, std::span<const double> w_perp,
                              double rho);

}  // namespace projem
