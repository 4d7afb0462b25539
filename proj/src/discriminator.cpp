#include "pure/discriminator.hpp"

#include <string>

namespace pure {

void DiscriminatorParams::check() const {
  if (mode == RelationMode::Vector) {
    if (dim_user() != dim_item()) throw Error("discriminator: vector mode needs equal dims");
    if (relation.rows() != dim_user() || relation.cols() != 1)
      throw Error("discriminator: relation must be d x 1 in vector mode");
  } else {
    if (relation.rows() != dim_user() || relation.cols() != dim_item())
      throw Error("discriminator: relation must be d_user x d_item in matrix mode");
  }
  if (!user_embeddings.allFinite() || !item_embeddings.allFinite() || !relation.allFinite())
    throw Error("discriminator: non-finite parameter");
}

DiscriminatorParams init_discriminator(int num_users, int num_items, int dim, RngStream& rng) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0)
    throw Error("init_discriminator: shape must be positive");
  DiscriminatorParams p;
  p.mode = RelationMode::Vector;
  p.user_embeddings.resize(num_users, dim);
  p.item_embeddings.resize(num_items, dim);
  for (int r = 0; r < num_users; ++r)
    for (int c = 0; c < dim; ++c) p.user_embeddings(r, c) = 0.01 * rng.gaussian();
  for (int r = 0; r < num_items; ++r)
    for (int c = 0; c < dim; ++c) p.item_embeddings(r, c) = 0.01 * rng.gaussian();
  p.relation = Mat::Ones(dim, 1);
  return p;
}

DiscriminatorParams init_discriminator_matrix(int num_users, int num_items, int dim_user,
                                              int dim_item, RngStream& rng) {
  if (num_users <= 0 || num_items <= 0 || dim_user <= 0 || dim_item <= 0)
    throw Error("init_discriminator_matrix: shape must be positive");
  DiscriminatorParams p;
  p.mode = RelationMode::Matrix;
  p.user_embeddings.resize(num_users, dim_user);
  p.item_embeddings.resize(num_items, dim_item);
  for (int r = 0; r < num_users; ++r)
    for (int c = 0; c < dim_user; ++c) p.user_embeddings(r, c) = 0.01 * rng.gaussian();
  for (int r = 0; r < num_items; ++r)
    for (int c = 0; c < dim_item; ++c) p.item_embeddings(r, c) = 0.01 * rng.gaussian();
  p.relation = Mat::Identity(dim_user, dim_item);
  return p;
}

double disc_logit(const DiscriminatorParams& p, const Eigen::Ref<const Vec>& e_user,
                  const Eigen::Ref<const Vec>& e_item) {
  if (e_user.size() != p.dim_user() || e_item.size() != p.dim_item())
    throw Error("disc_score: embedding dims " + std::to_string(e_user.size()) + "/" +
                std::to_string(e_item.size()) + " do not match discriminator " +
                std::to_string(p.dim_user()) + "/" + std::to_string(p.dim_item()));
  if (p.mode == RelationMode::Vector)
    return (e_user.array() * e_item.array()).matrix().dot(p.relation.col(0));
  return e_user.dot(p.relation * e_item);
}

double disc_score_ui(const DiscriminatorParams& p, int user, int item) {
  if (user < 0 || user >= p.num_users()) throw Error("disc_score: unknown user index");
  if (item < 0 || item >= p.num_items()) throw Error("disc_score: unknown item index");
  return disc_score(p, p.user_embeddings.row(user).transpose(),
                    p.item_embeddings.row(item).transpose());
}

void DiscGrads::setZero() {
  user_embeddings.setZero();
  item_embeddings.setZero();
  relation.setZero();
}

DiscGrads make_disc_grads(const DiscriminatorParams& p) {
  DiscGrads g;
  g.user_embeddings = Mat::Zero(p.user_embeddings.rows(), p.user_embeddings.cols());
  g.item_embeddings = Mat::Zero(p.item_embeddings.rows(), p.item_embeddings.cols());
  g.relation = Mat::Zero(p.relation.rows(), p.relation.cols());
  return g;
}

namespace {

const Vec& resolve(const Mat& table, int idx, const Vec& fake, int dim, const char* side,
                   std::size_t term_no, Vec& scratch) {
  if (idx >= 0) {
    if (idx >= table.rows())
      throw Error(std::string("disc_backward: term ") + std::to_string(term_no) + " has unknown " +
                  side + " index " + std::to_string(idx));
    scratch = table.row(idx).transpose();
    return scratch;
  }
  if (fake.size() != dim)
    throw Error(std::string("disc_backward: term ") + std::to_string(term_no) + " fake " + side +
                " has dim " + std::to_string(fake.size()) + ", expected " + std::to_string(dim));
  return fake;
}

}  // namespace

void disc_backward(const DiscriminatorParams& p, std::span<const DiscTerm> terms, DiscGrads& out) {
  out.setZero();
  Vec eu_s, ei_s;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const DiscTerm& term = terms[t];
    const Vec& eu = resolve(p.user_embeddings, term.user, term.fake_user, p.dim_user(), "user", t, eu_s);
    const Vec& ei = resolve(p.item_embeddings, term.item, term.fake_item, p.dim_item(), "item", t, ei_s);
    const double score = sigmoid(disc_logit(p, eu, ei));
    // d(log D)/dlogit = 1 - D,  d(log(1-D))/dlogit = -D.
    const double dlogit = term.coeff * (term.one_minus ? -score : 1.0 - score);
    if (!std::isfinite(dlogit))
      throw Error("disc_backward: non-finite gradient at term " + std::to_string(t));
    if (p.mode == RelationMode::Vector) {
      const auto r = p.relation.col(0).array();
      if (term.user >= 0)
        out.user_embeddings.row(term.user).array() += dlogit * (ei.array() * r).transpose();
      if (term.item >= 0)
        out.item_embeddings.row(term.item).array() += dlogit * (eu.array() * r).transpose();
      out.relation.col(0).array() += dlogit * (eu.array() * ei.array());
    } else {
      if (term.user >= 0)
        out.user_embeddings.row(term.user) += (dlogit * (p.relation * ei)).transpose();
      if (term.item >= 0)
        out.item_embeddings.row(term.item) += (dlogit * (p.relation.transpose() * eu)).transpose();
      out.relation += dlogit * (eu * ei.transpose());
    }
  }
}

DiscGrads disc_backward(const DiscriminatorParams& p, std::span<const DiscTerm> terms) {
  DiscGrads g = make_disc_grads(p);
  disc_backward(p, terms, g);
  return g;
}

double disc_objective(const DiscriminatorParams& p, std::span<const DiscTerm> terms) {
  double total = 0.0;
  Vec eu_s, ei_s;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const DiscTerm& term = terms[t];
    const Vec& eu = resolve(p.user_embeddings, term.user, term.fake_user, p.dim_user(), "user", t, eu_s);
    const Vec& ei = resolve(p.item_embeddings, term.item, term.fake_item, p.dim_item(), "item", t, ei_s);
    const double score = sigmoid(disc_logit(p, eu, ei));
    total += term.coeff * (term.one_minus ? log_prob(1.0 - score) : log_prob(score));
  }
  return total;
}

}  // namespace pure
