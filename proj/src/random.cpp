#include "diph/random.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"

namespace diph {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master + mix_seed(index + 1));
}

Matrix random_unit_rows(int n, int d, Rng& rng) {
  if (d < 1) throw ValidationError("sphere dimension must be at least 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix out(n, d);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    // Resample the (measure-zero) near-zero draws.
    do {
      for (int j = 0; j < d; ++j) out(i, j) = gauss(rng);
      norm = out.row(i).norm();
    } while (!(norm > kZeroNormTol));
    out.row(i) /= norm;
  }
  return out;
}

double draw_beta(double a, double b, Rng& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace diph
