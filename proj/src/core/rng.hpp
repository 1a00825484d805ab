#pragma once

#include <cstdint>
#include <random>

#include "core/linalg.hpp"

namespace vbvar {

// Seeded generator. Not safe for concurrent use; give each thread its own child().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  double normal();
  double uniform();
  double chi_square(double dof);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  // Independent stream derived deterministically from (seed, stream).
  Rng child(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace vbvar
