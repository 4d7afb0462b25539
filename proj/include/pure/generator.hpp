#pragma once

#include <span>

#include "pure/discriminator.hpp"

namespace pure {

using NoiseVector = Vec;

// Two-layer rectified MLP mapping noise z in R^d to a synthetic embedding:
//   out = relu(w2 * relu(w1 z + b1) + b2).
struct GeneratorParams {
  Mat w1;  // k x d
  Vec b1;  // k
  Mat w2;  // d x k
  Vec b2;  // d
  int dim() const { return static_cast<int>(w2.rows()); }
  int hidden() const { return static_cast<int>(w1.rows()); }
  void check() const;
};

// lecun_uniform weights (U[-sqrt(3/fan_in), sqrt(3/fan_in)]), zero biases.
GeneratorParams init_generator(int dim, int hidden, RngStream& rng);

// z ~ N(0, delta * I).
NoiseVector sample_noise(int dim, double delta, RngStream& rng);

Vec gen_forward(const GeneratorParams& g, const Eigen::Ref<const Vec>& z);

enum class FakeSide { User, Item };

// One generated pair: the fake fills `side`, partner is the real embedding of
// the other slot. Contributes coeff * (-log D(pair)) to the generator loss.
struct GenTerm {
  NoiseVector noise;
  Vec partner;
  FakeSide side = FakeSide::Item;
  double coeff = 1.0;
};

struct GenGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
  void setZero();
};

GenGrads make_gen_grads(const GeneratorParams& g);

// Gradient of sum_t coeff_t * (-log D(pair_t)) w.r.t. the generator weights,
// through the frozen discriminator. Rectifier subgradient at 0 is taken as 0.
void gen_backward(const GeneratorParams& g, const DiscriminatorParams& d,
                  std::span<const GenTerm> terms, GenGrads& out);
GenGrads gen_backward(const GeneratorParams& g, const DiscriminatorParams& d,
                      std::span<const GenTerm> terms);

// Loss consistent with gen_backward, for checks and epoch reports.
double gen_objective(const GeneratorParams& g, const DiscriminatorParams& d,
                     std::span<const GenTerm> terms);

}  // namespace pure
