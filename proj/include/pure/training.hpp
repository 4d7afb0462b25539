#pragma once

#include <functional>

#include "pure/interactions.hpp"
#include "pure/trained_model.hpp"

namespace pure {

enum class GmfMode { Pn, Pu };

struct TrainHooks {
  // Called after each epoch's stats are appended; the model is live.
  std::function<void(int epoch, const TrainedModel&)> on_epoch;
  // Diagnostics (negative-risk epochs and the like).
  std::function<void(const std::string&)> info;
};

TrainedModel train_item_pop(const Interactions& train);

// One GMF discriminator, no generators. Pn trains plain BCE against C * n_p
// fresh uniform non-positive draws per epoch; Pu ascends the PU objective with
// unlabeled_sample_size(n_p, pi_p, C) fresh draws per epoch.
TrainedModel train_gmf(const Interactions& train, const HyperParams& hp, GmfMode mode,
                       std::uint64_t seed, const TrainHooks* hooks = nullptr);

// Adversarial loop: d_steps discriminator passes (PU objective over positives,
// an independently resampled positive set, fresh unlabeled draws, and fake
// pairs from both generators), then g_steps generator passes, per epoch.
// n_u is always unlabeled_sample_size(n_p, pi_p, 1).
TrainedModel train_pure(const Interactions& train, const HyperParams& hp,
                        const DiscriminatorParams* pretrained, std::uint64_t seed,
                        const TrainHooks* hooks = nullptr);

// Deep-copies the discriminator out of a PU-GMF model for use as the warm
// start of train_pure (which builds fresh optimizer state and generators).
DiscriminatorParams pretrain_handoff(const TrainedModel& pu_gmf);

std::string training_log_header();
std::string training_log_line(int epoch, const EpochStats& stats);

}  // namespace pure
