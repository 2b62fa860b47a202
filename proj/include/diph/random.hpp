#pragma once

#include "diph/dpp.hpp"

#include <cstdint>

namespace diph {

// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Child seed for stream `index` of `master`: mix(master + mix(index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// n rows drawn uniformly on the unit sphere S^{d-1} (normalized Gaussians).
Matrix random_unit_rows(int n, int d, Rng& rng);

// Beta(a, b) via the two-gamma construction.
double draw_beta(double a, double b, Rng& rng);

}  // namespace diph
