#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace mec {

using Rng = std::mt19937_64;

// Deterministic generator for the (seed, index) stream; samplers are pure
// functions of these two numbers.
Rng make_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
Eigen::VectorXd normal_vector(Rng& rng, int n, double scale = 1.0);
Eigen::VectorXd uniform_vector(Rng& rng, int n, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi_inclusive);

}  // namespace mec
