#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pure/common.hpp"

namespace pure {

enum class LossReduction { Sum, Mean };

// How the adversarial loop orders its updates. Epoch: d_steps full passes over
// the data, then g_steps full passes (the written algorithm read literally).
// Batch: per positive minibatch, d_steps discriminator updates then g_steps
// generator updates, which keeps the two players coupled at batch granularity.
enum class Alternation { Epoch, Batch };

struct HyperParams {
  double pi_p = 1e-4;   // positive-class prior
  double delta = 0.01;  // noise variance
  int d = 5;            // embedding dim
  int k = 10;           // generator hidden width (defaults to 2 * d)
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 128;
  double C = 1.0;       // negative-to-positive sampling ratio
  int d_steps = 1;
  int g_steps = 10;
  double gen_ratio = 1.0;  // generated-to-sampled unlabeled ratio
  LossReduction reduction = LossReduction::Mean;
  Alternation alternation = Alternation::Epoch;

  void validate() const;
};

// Components of the positive-unlabeled discriminator objective (sums over the
// batch, natural logs, maximization form). total is their sum.
struct LossReport {
  double positive_term = 0.0;
  double negative_correction = 0.0;
  double unlabeled_term = 0.0;
  double generated_term = 0.0;
  double total = 0.0;
};

// Smallest n_u with sqrt(C) * n_p / n_u <= (1 - (sqrt(C) + 1) * pi_p)^2,
// i.e. ceil(sqrt(C) * n_p / (1 - (sqrt(C) + 1) * pi_p)^2).
std::int64_t unlabeled_sample_size(std::int64_t n_p, double pi_p, double C);

// pi_p * sum log D(pos) - pi_p * sum log(1 - D(pos))
//   + sum log(1 - D(unlabeled)) + sum log(1 - D(generated)).
LossReport pu_disc_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
                        std::span<const double> gen_scores, double pi_p);

// Plain binary cross-entropy: -sum log(pos) - sum log(1 - neg).
double pn_disc_loss(std::span<const double> pos_scores, std::span<const double> neg_scores);

// Non-saturating generator loss: -sum log D(fake).
double gen_loss(std::span<const double> gen_scores);

// PU objective without generated samples, as a single number.
double pu_pointwise_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
                         double pi_p);

}  // namespace pure
