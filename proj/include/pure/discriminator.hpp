#pragma once

#include <span>
#include <vector>

#include "pure/common.hpp"
#include "pure/rng.hpp"

namespace pure {

enum class RelationMode { Vector, Matrix };

// GMF discriminator. Vector mode scores sigmoid((e_u .* e_i)' r); matrix mode
// generalizes to sigmoid(e_u' R e_i) and reduces to vector mode when R is
// diagonal. relation is d x 1 in vector mode, d_user x d_item in matrix mode.
struct DiscriminatorParams {
  Mat user_embeddings;  // M x d_user
  Mat item_embeddings;  // N x d_item
  Mat relation;
  RelationMode mode = RelationMode::Vector;

  int num_users() const { return static_cast<int>(user_embeddings.rows()); }
  int num_items() const { return static_cast<int>(item_embeddings.rows()); }
  int dim_user() const { return static_cast<int>(user_embeddings.cols()); }
  int dim_item() const { return static_cast<int>(item_embeddings.cols()); }
  void check() const;
};

// Embeddings i.i.d. Gaussian(0, 0.01^2); relation all-ones (vector mode) or
// the identity (matrix mode).
DiscriminatorParams init_discriminator(int num_users, int num_items, int dim, RngStream& rng);
DiscriminatorParams init_discriminator_matrix(int num_users, int num_items, int dim_user,
                                              int dim_item, RngStream& rng);

double disc_logit(const DiscriminatorParams& p, const Eigen::Ref<const Vec>& e_user,
                  const Eigen::Ref<const Vec>& e_item);

inline double disc_score(const DiscriminatorParams& p, const Eigen::Ref<const Vec>& e_user,
                         const Eigen::Ref<const Vec>& e_item) {
  return sigmoid(disc_logit(p, e_user, e_item));
}

double disc_score_ui(const DiscriminatorParams& p, int user, int item);

// One weighted log term of a discriminator objective:
//   coeff * log D        (one_minus = false)
//   coeff * log(1 - D)   (one_minus = true)
// Real rows are referenced by index; a negative index means the corresponding
// fake_* vector (a generator output) fills that slot instead.
struct DiscTerm {
  int user = -1;
  int item = -1;
  Vec fake_user;
  Vec fake_item;
  double coeff = 1.0;
  bool one_minus = false;
};

struct DiscGrads {
  Mat user_embeddings;
  Mat item_embeddings;
  Mat relation;
  void setZero();
};

DiscGrads make_disc_grads(const DiscriminatorParams& p);

// Accumulates d/dtheta of sum_t coeff_t * term_t into `out` (zeroed first).
// Rows not touched by any term keep zero gradient.
void disc_backward(const DiscriminatorParams& p, std::span<const DiscTerm> terms, DiscGrads& out);
DiscGrads disc_backward(const DiscriminatorParams& p, std::span<const DiscTerm> terms);

// Objective value consistent with disc_backward (probabilities clamped before
// the logs); used by the finite-difference checks and the epoch reports.
double disc_objective(const DiscriminatorParams& p, std::span<const DiscTerm> terms);

}  // namespace pure
