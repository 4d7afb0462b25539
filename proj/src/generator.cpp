#include "pure/generator.hpp"

#include <cmath>
#include <string>

namespace pure {

void GeneratorParams::check() const {
  if (w1.rows() != b1.size() || w2.rows() != b2.size() || w1.rows() != w2.cols() ||
      w2.rows() != w1.cols())
    throw Error("generator: inconsistent layer shapes");
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite())
    throw Error("generator: non-finite parameter");
}

GeneratorParams init_generator(int dim, int hidden, RngStream& rng) {
  if (dim <= 0 || hidden <= 0) throw Error("init_generator: shape must be positive");
  GeneratorParams g;
  g.w1.resize(hidden, dim);
  g.w2.resize(dim, hidden);
  const double lim1 = std::sqrt(3.0 / dim);     // fan_in of layer 1
  const double lim2 = std::sqrt(3.0 / hidden);  // fan_in of layer 2
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < dim; ++c) g.w1(r, c) = lim1 * (2.0 * rng.uniform() - 1.0);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < hidden; ++c) g.w2(r, c) = lim2 * (2.0 * rng.uniform() - 1.0);
  g.b1 = Vec::Zero(hidden);
  g.b2 = Vec::Zero(dim);
  return g;
}

NoiseVector sample_noise(int dim, double delta, RngStream& rng) {
  if (dim <= 0) throw Error("sample_noise: dim must be positive");
  if (delta <= 0.0) throw Error("sample_noise: delta must be positive");
  Vec z(dim);
  const double sd = std::sqrt(delta);
  for (int j = 0; j < dim; ++j) z[j] = sd * rng.gaussian();
  return z;
}

Vec gen_forward(const GeneratorParams& g, const Eigen::Ref<const Vec>& z) {
  if (z.size() != g.w1.cols())
    throw Error("gen_forward: noise dim " + std::to_string(z.size()) + " != " +
                std::to_string(g.w1.cols()));
  const Vec h = ((g.w1 * z + g.b1).array().max(0.0)).matrix();
  return ((g.w2 * h + g.b2).array().max(0.0)).matrix();
}

void GenGrads::setZero() {
  w1.setZero();
  b1.setZero();
  w2.setZero();
  b2.setZero();
}

GenGrads make_gen_grads(const GeneratorParams& g) {
  GenGrads out;
  out.w1 = Mat::Zero(g.w1.rows(), g.w1.cols());
  out.b1 = Vec::Zero(g.b1.size());
  out.w2 = Mat::Zero(g.w2.rows(), g.w2.cols());
  out.b2 = Vec::Zero(g.b2.size());
  return out;
}

namespace {

// d(logit)/d(fake vector) for the slot the fake occupies.
Vec logit_grad_wrt_fake(const DiscriminatorParams& d, const Vec& partner, FakeSide side) {
  if (d.mode == RelationMode::Vector)
    return (partner.array() * d.relation.col(0).array()).matrix();
  return side == FakeSide::Item ? Vec(d.relation.transpose() * partner) : Vec(d.relation * partner);
}

}  // namespace

void gen_backward(const GeneratorParams& g, const DiscriminatorParams& d,
                  std::span<const GenTerm> terms, GenGrads& out) {
  out.setZero();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const GenTerm& term = terms[t];
    if (term.noise.size() != g.w1.cols())
      throw Error("gen_backward: bad noise dim at term " + std::to_string(t));
    const Vec a1 = g.w1 * term.noise + g.b1;
    const Vec h = a1.array().max(0.0).matrix();
    const Vec a2 = g.w2 * h + g.b2;
    const Vec fake = a2.array().max(0.0).matrix();

    const Vec eu = term.side == FakeSide::Item ? term.partner : fake;
    const Vec ei = term.side == FakeSide::Item ? fake : term.partner;
    const double score = sigmoid(disc_logit(d, eu, ei));
    // loss term = -coeff * log D; dloss/dlogit = -coeff * (1 - D).
    const double dlogit = -term.coeff * (1.0 - score);
    if (!std::isfinite(dlogit))
      throw Error("gen_backward: non-finite gradient at term " + std::to_string(t));

    const Vec dfake = dlogit * logit_grad_wrt_fake(d, term.partner, term.side);
    const Vec da2 = (a2.array() > 0.0).select(dfake, 0.0);
    out.w2 += da2 * h.transpose();
    out.b2 += da2;
    const Vec dh = g.w2.transpose() * da2;
    const Vec da1 = (a1.array() > 0.0).select(dh, 0.0);
    out.w1 += da1 * term.noise.transpose();
    out.b1 += da1;
  }
}

GenGrads gen_backward(const GeneratorParams& g, const DiscriminatorParams& d,
                      std::span<const GenTerm> terms) {
  GenGrads out = make_gen_grads(g);
  gen_backward(g, d, terms, out);
  return out;
}

double gen_objective(const GeneratorParams& g, const DiscriminatorParams& d,
                     std::span<const GenTerm> terms) {
  double total = 0.0;
  for (const GenTerm& term : terms) {
    const Vec fake = gen_forward(g, term.noise);
    const Vec& eu = term.side == FakeSide::Item ? term.partner : fake;
    const Vec& ei = term.side == FakeSide::Item ? fake : term.partner;
    total -= term.coeff * log_prob(sigmoid(disc_logit(d, eu, ei)));
  }
  return total;
}

}  // namespace pure
