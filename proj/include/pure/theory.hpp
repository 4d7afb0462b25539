#pragma once

#include "pure/common.hpp"
#include "pure/rng.hpp"

namespace pure::theory {

// Finite-support instance of the minimax game. p_u is identified with the data
// marginal pi_p * p_p + (1 - pi_p) * p_n throughout.
struct DiscreteDistributions {
  Vec p_p;  // positive-class density
  Vec p_n;  // negative-class density
  Vec p_g;  // generator density
  double pi_p = 0.1;

  int support() const { return static_cast<int>(p_p.size()); }
  Vec p_u() const { return pi_p * p_p + (1.0 - pi_p) * p_n; }
  void validate() const;  // entrywise >= 0, each sums to 1 within 1e-12
};

// Natural-log binary entropy H(q) = -q ln q - (1-q) ln(1-q), with 0 ln 0 = 0.
double binary_entropy(double q);

// KL(p || q) in nats over a shared finite support; 0 ln 0 = 0; errors when p
// has mass where q vanishes.
double kl_divergence(const Eigen::Ref<const Vec>& p, const Eigen::Ref<const Vec>& q);

// Pointwise maximizer D*(x) = pi_p p_p(x) / (p_u(x) + p_g(x)).
Vec optimal_discriminator(const DiscreteDistributions& dists);

// V(D) = sum_x [ pi_p p_p log D - pi_p p_p log(1-D) + p_u log(1-D) + p_g log(1-D) ],
// with D clamped away from {0, 1} before the logs.
double objective_value(const DiscreteDistributions& dists, const Eigen::Ref<const Vec>& D);

// V at the optimal discriminator, both evaluated directly and through the
// entropy + two-KL decomposition; the two must agree to ~1e-9.
struct DecompositionResult {
  double direct = 0.0;
  double decomposed = 0.0;
};
DecompositionResult generator_objective_decomposition(const DiscreteDistributions& dists);

struct EquilibriumReport {
  bool is_equilibrium = false;
  bool degenerate = false;        // pi_p == 0: D* vanishes, not equilibrium-tested
  double max_pp_deviation = 0.0;  // max |p_p - (p_u + p_g)/2|
  double max_d_deviation = 0.0;   // max |D* - pi_p/2|
  double v_deviation = 0.0;       // |V(D*) + 2 H(pi_p/2)|
};

// Certifies p_p = (p_u + p_g)/2 (within 1e-9) and reports how far D* and V
// sit from their equilibrium values pi_p/2 and -2 H(pi_p/2).
EquilibriumReport equilibrium_certificate(const DiscreteDistributions& dists);

// Test/CLI instance builders. Equilibrium instances satisfy
// p_g = (2 - pi_p) p_p - (1 - pi_p) p_n >= 0 exactly (up to FP round-off).
DiscreteDistributions make_random_instance(int support, double pi_p, RngStream& rng);
DiscreteDistributions make_equilibrium_instance(int support, double pi_p, RngStream& rng);
// Bumps one generator mass by `amount` and renormalizes p_g.
DiscreteDistributions perturb_instance(const DiscreteDistributions& dists, double amount);

}  // namespace pure::theory
