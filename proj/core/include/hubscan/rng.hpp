#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hubscan {

using Rng = std::mt19937_64;

// Stream seed for one stochastic component: hash(master, component, shard).
std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                          std::uint64_t shard = 0) noexcept;

inline Rng make_rng(std::uint64_t master, std::string_view component, std::uint64_t shard = 0) {
  return Rng(derive_seed(master, component, shard));
}

// Portable draws; std distributions are implementation-defined.
double uniform01(Rng& rng) noexcept;
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;
double standard_normal(Rng& rng) noexcept;

}  // namespace hubscan
