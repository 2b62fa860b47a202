#pragma once

#include <limits>

namespace diph {

// Tolerances shared by every module.
inline constexpr double kRowNormTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kEigenFloorTol = 1e-9;
// Residual mass below this aborts the sampler's projection phase.
inline constexpr double kDeflationTol = 1e-12;
// Rows with norm below this are treated as zero (projection, spectral rows).
inline constexpr double kZeroNormTol = 1e-12;

// Largest node count accepted by the subset-enumeration oracle.
inline constexpr int kMaxBruteForceNodes = 20;

// log P(E = e) for a numerically singular principal submatrix.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

}  // namespace diph
