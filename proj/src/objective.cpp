#include "pure/objective.hpp"

#include <cmath>
#include <limits>

namespace pure {

void HyperParams::validate() const {
  if (!(pi_p > 0.0 && pi_p < 0.5)) throw Error("hyper: pi_p must lie in (0, 0.5)");
  if (C <= 0.0) throw Error("hyper: C must be positive");
  if ((std::sqrt(C) + 1.0) * pi_p >= 1.0)
    throw Error("hyper: (sqrt(C) + 1) * pi_p must be < 1");
  if (delta <= 0.0) throw Error("hyper: delta must be positive");
  if (d <= 0 || k <= 0) throw Error("hyper: dims must be positive");
  if (lr <= 0.0) throw Error("hyper: lr must be positive");
  if (epochs < 0 || batch_size <= 0) throw Error("hyper: bad epochs/batch_size");
  if (d_steps < 0 || g_steps < 0) throw Error("hyper: steps must be >= 0");
  if (gen_ratio < 0.0) throw Error("hyper: gen_ratio must be >= 0");
}

std::int64_t unlabeled_sample_size(std::int64_t n_p, double pi_p, double C) {
  if (n_p < 0) throw Error("unlabeled_sample_size: n_p must be >= 0");
  if (C <= 0.0) throw Error("unlabeled_sample_size: C must be positive");
  if (pi_p < 0.0) throw Error("unlabeled_sample_size: pi_p must be >= 0");
  const double root_c = std::sqrt(C);
  const double denom = 1.0 - (root_c + 1.0) * pi_p;
  if (denom <= 0.0) throw Error("unlabeled_sample_size: (sqrt(C) + 1) * pi_p must be < 1");
  const double x = static_cast<double>(n_p) * root_c / (denom * denom);
  // A hair of slack, relative so it scales with n_p, keeps exact integer
  // ratios (e.g. 25 at pi_p = 0.4, C = 1) from being pushed up by round-off.
  return static_cast<std::int64_t>(
      std::ceil(x - 1e-9 - 8.0 * std::numeric_limits<double>::epsilon() * x));
}

LossReport pu_disc_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
                        std::span<const double> gen_scores, double pi_p) {
  if (pos_scores.empty()) throw Error("pu_disc_loss: empty positive batch");
  LossReport r;
  for (double s : pos_scores) {
    r.positive_term += pi_p * log_prob(clamp_prob(s));
    r.negative_correction -= pi_p * log_prob(1.0 - clamp_prob(s));
  }
  for (double s : unl_scores) r.unlabeled_term += log_prob(1.0 - clamp_prob(s));
  for (double s : gen_scores) r.generated_term += log_prob(1.0 - clamp_prob(s));
  r.total = r.positive_term + r.negative_correction + r.unlabeled_term + r.generated_term;
  return r;
}

double pn_disc_loss(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty()) throw Error("pn_disc_loss: empty positive batch");
  double loss = 0.0;
  for (double s : pos_scores) loss -= log_prob(clamp_prob(s));
  for (double s : neg_scores) loss -= log_prob(1.0 - clamp_prob(s));
  return loss;
}

double gen_loss(std::span<const double> gen_scores) {
  double loss = 0.0;
  for (double s : gen_scores) loss -= log_prob(clamp_prob(s));
  return loss;
}

double pu_pointwise_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
                         double pi_p) {
  return pu_disc_loss(pos_scores, unl_scores, {}, pi_p).total;
}

}  // namespace pure
