#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pure/discriminator.hpp"
#include "pure/generator.hpp"
#include "pure/objective.hpp"

namespace pure {

enum class ModelKind { ItemPop, PnGmf, PuGmf, Pure };

struct EpochStats {
  LossReport disc;
  double gen_loss = 0.0;
  double wall_ms = 0.0;
  // Empirical R_u^- - pi_p * R_p^- for the epoch; reported (not corrected)
  // when it goes negative. Only meaningful for the PU objectives.
  double negative_risk = 0.0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::ItemPop;
  int num_users = 0;
  int num_items = 0;
  std::optional<DiscriminatorParams> discriminator;
  std::optional<GeneratorParams> gen_user;
  std::optional<GeneratorParams> gen_item;
  std::vector<std::int64_t> popularity;  // per-item positive counts (ItemPop only)
  HyperParams hyper;
  std::vector<EpochStats> history;

  void check() const;
  // Ranking score for (user, item): popularity count or discriminator score.
  double score(int user, int item) const;
};

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

}  // namespace pure
