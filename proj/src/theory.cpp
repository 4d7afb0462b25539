#include "pure/theory.hpp"

#include <cmath>
#include <string>

namespace pure::theory {

namespace {

void check_density(const Vec& p, const char* name) {
  for (int j = 0; j < p.size(); ++j)
    if (!(p[j] >= 0.0))
      throw Error(std::string("theory: ") + name + " has a negative mass at " + std::to_string(j));
  if (std::abs(p.sum() - 1.0) > 1e-12)
    throw Error(std::string("theory: ") + name + " does not sum to 1");
}

}  // namespace

void DiscreteDistributions::validate() const {
  if (p_p.size() == 0) throw Error("theory: empty support");
  if (p_n.size() != p_p.size() || p_g.size() != p_p.size())
    throw Error("theory: support size mismatch");
  if (!(pi_p >= 0.0 && pi_p <= 1.0)) throw Error("theory: pi_p must lie in [0, 1]");
  check_density(p_p, "p_p");
  check_density(p_n, "p_n");
  check_density(p_g, "p_g");
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("binary_entropy: q must lie in [0, 1]");
  double h = 0.0;
  if (q > 0.0) h -= q * std::log(q);
  if (q < 1.0) h -= (1.0 - q) * std::log(1.0 - q);
  return h;
}

double kl_divergence(const Eigen::Ref<const Vec>& p, const Eigen::Ref<const Vec>& q) {
  if (p.size() != q.size()) throw Error("kl_divergence: support size mismatch");
  double kl = 0.0;
  for (int j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;  // 0 ln 0 = 0
    if (q[j] <= 0.0)
      throw Error("kl_divergence: absolute continuity violated at point " + std::to_string(j));
    kl += p[j] * std::log(p[j] / q[j]);
  }
  return kl;
}

Vec optimal_discriminator(const DiscreteDistributions& dists) {
  dists.validate();
  const Vec denom = dists.p_u() + dists.p_g;
  Vec d(dists.support());
  for (int j = 0; j < d.size(); ++j) {
    const double num = dists.pi_p * dists.p_p[j];
    if (denom[j] <= 0.0) {
      if (num > 0.0)
        throw Error("optimal_discriminator: density ratio undefined at point " + std::to_string(j));
      d[j] = 0.0;
      continue;
    }
    d[j] = num / denom[j];
  }
  return d;
}

double objective_value(const DiscreteDistributions& dists, const Eigen::Ref<const Vec>& D) {
  dists.validate();
  if (D.size() != dists.p_p.size()) throw Error("objective_value: D has wrong support size");
  const Vec pu = dists.p_u();
  double v = 0.0;
  for (int j = 0; j < D.size(); ++j) {
    const double d = clamp_prob(D[j]);
    v += dists.pi_p * dists.p_p[j] * std::log(d);
    v += (-dists.pi_p * dists.p_p[j] + pu[j] + dists.p_g[j]) * std::log(1.0 - d);
  }
  return v;
}

DecompositionResult generator_objective_decomposition(const DiscreteDistributions& dists) {
  DecompositionResult out;
  const Vec d_star = optimal_discriminator(dists);
  out.direct = objective_value(dists, d_star);

  const Vec ref = 0.5 * (dists.p_u() + dists.p_g);
  const Vec mix = ((1.0 - dists.pi_p) * dists.p_n + dists.p_g) / (2.0 - dists.pi_p);
  out.decomposed = -2.0 * binary_entropy(dists.pi_p / 2.0) +
                   dists.pi_p * kl_divergence(dists.p_p, ref) +
                   (2.0 - dists.pi_p) * kl_divergence(mix, ref);
  return out;
}

EquilibriumReport equilibrium_certificate(const DiscreteDistributions& dists) {
  dists.validate();
  EquilibriumReport report;
  if (dists.pi_p == 0.0) {
    report.degenerate = true;
    return report;
  }
  const Vec half_mix = 0.5 * (dists.p_u() + dists.p_g);
  report.max_pp_deviation = (dists.p_p - half_mix).cwiseAbs().maxCoeff();
  report.is_equilibrium = report.max_pp_deviation < 1e-9;
  const Vec d_star = optimal_discriminator(dists);
  report.max_d_deviation = (d_star.array() - dists.pi_p / 2.0).abs().maxCoeff();
  report.v_deviation =
      std::abs(objective_value(dists, d_star) + 2.0 * binary_entropy(dists.pi_p / 2.0));
  return report;
}

namespace {

Vec random_simplex(int support, RngStream& rng) {
  Vec p(support);
  for (int j = 0; j < support; ++j) p[j] = 0.2 + 0.8 * rng.uniform();  // bounded away from 0
  p /= p.sum();
  return p;
}

}  // namespace

DiscreteDistributions make_random_instance(int support, double pi_p, RngStream& rng) {
  if (support < 2) throw Error("make_random_instance: support must be >= 2");
  DiscreteDistributions d;
  d.pi_p = pi_p;
  d.p_p = random_simplex(support, rng);
  d.p_n = random_simplex(support, rng);
  d.p_g = random_simplex(support, rng);
  d.validate();
  return d;
}

DiscreteDistributions make_equilibrium_instance(int support, double pi_p, RngStream& rng) {
  if (support < 2) throw Error("make_equilibrium_instance: support must be >= 2");
  DiscreteDistributions d;
  d.pi_p = pi_p;
  d.p_p = random_simplex(support, rng);
  const Vec q = random_simplex(support, rng);
  // p_n leans toward p_p just enough that p_g = (2-pi)p_p - (1-pi)p_n stays
  // nonnegative; alpha -> 0 always works since then p_g -> p_p.
  double alpha = 0.5;
  for (int tries = 0; tries < 60; ++tries) {
    d.p_n = (1.0 - alpha) * d.p_p + alpha * q;
    d.p_g = (2.0 - pi_p) * d.p_p - (1.0 - pi_p) * d.p_n;
    if (d.p_g.minCoeff() >= 0.0) break;
    alpha *= 0.5;
  }
  if (d.p_g.minCoeff() < 0.0) throw Error("make_equilibrium_instance: failed to balance masses");
  d.validate();
  return d;
}

DiscreteDistributions perturb_instance(const DiscreteDistributions& dists, double amount) {
  DiscreteDistributions d = dists;
  d.p_g[0] += amount;
  d.p_g /= d.p_g.sum();
  d.validate();
  return d;
}

}  // namespace pure::theory
