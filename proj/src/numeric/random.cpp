#include "mec/random.hpp"

#include <cmath>

#include "mec/manifold.hpp"

namespace mec {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open_closed(Rng& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  return Rng(splitmix(seed ^ splitmix(index ^ splitmix(salt))));
}

double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double standard_normal(Rng& rng) {
  const double u1 = unit_open_closed(rng);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

Eigen::VectorXd normal_vector(Rng& rng, int n, double scale) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * standard_normal(rng);
  return v;
}

Eigen::VectorXd uniform_vector(Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

int uniform_int(Rng& rng, int lo, int hi_inclusive) {
  const auto span = static_cast<std::uint64_t>(hi_inclusive - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

}  // namespace mec
